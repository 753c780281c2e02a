//! Topology-guided path-integral planning and control for 2D first-exit
//! problems.
//!
//! The library has two halves. The expansion half grows a random graph over
//! the state space and projects a goal-rooted tree into a signature-augmented
//! space, producing one deterministic reference trajectory per homology
//! class. The execution half estimates the stochastically optimal control by
//! importance-sampled Monte-Carlo rollouts around those references and applies
//! it in a receding-horizon loop.

pub mod dubins;
pub mod dynamics;
pub mod env;
pub mod geometry;
pub mod topology;

pub use dynamics::{ControlTape, SdeModel, Trajectory};
pub use env::{ExitClass, Workspace};
pub use geometry::Point;
pub use topology::{ClassFilter, HSignature};
