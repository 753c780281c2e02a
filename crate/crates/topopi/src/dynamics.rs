//! Control-affine SDE models, Euler–Maruyama stepping, cost evaluation and
//! exact two-point boundary connections for the two built-in systems.
//!
//! Both systems keep the partitioned form: only the bottom m rows of the
//! control and diffusion maps are nonzero, and the noise-compatibility
//! constraint λ·G_c·R⁻¹·G_c' = B_c·B_c' fixes λ at construction, so it cannot
//! be violated by configuration.

use crate::dubins::{self, Segment};
use crate::env::{ExitClass, Workspace};
use crate::geometry::Point;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("integration step produced a non-finite state")]
    NonFiniteState,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

/// Time-stamped state sequence, optionally with the controls that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<DVector<f64>>,
        controls: Option<Vec<DVector<f64>>>,
    ) -> Result<Self, DynamicsError> {
        if times.len() != states.len() {
            return Err(DynamicsError::InvalidTrajectory(
                "times and states must have equal length".into(),
            ));
        }
        if times.is_empty() {
            return Err(DynamicsError::InvalidTrajectory("empty trajectory".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DynamicsError::InvalidTrajectory(
                "times must be strictly increasing".into(),
            ));
        }
        if let Some(u) = &controls {
            if u.len() + 1 != times.len() {
                return Err(DynamicsError::InvalidTrajectory(
                    "controls must align to intervals".into(),
                ));
            }
        }
        Ok(Trajectory { times, states, controls })
    }

    pub fn single(x: DVector<f64>) -> Self {
        Trajectory { times: vec![0.0], states: vec![x], controls: None }
    }

    pub fn positions(&self) -> Vec<Point> {
        self.states.iter().map(|s| Point::new(s[0], s[1])).collect()
    }

    pub fn last_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn duration(&self) -> f64 {
        self.times.last().unwrap() - self.times[0]
    }
}

/// Open-loop control tape on a fixed step; reads past the end yield zeros,
/// which is the first-exit augmentation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlTape {
    pub dt: f64,
    pub controls: Vec<DVector<f64>>,
}

impl ControlTape {
    pub fn empty(dt: f64) -> Self {
        ControlTape { dt, controls: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.controls.len() as f64
    }

    /// Control at step `i`, zero-augmented beyond the tape end.
    pub fn control_at(&self, i: usize, control_dim: usize) -> DVector<f64> {
        self.controls
            .get(i)
            .cloned()
            .unwrap_or_else(|| DVector::zeros(control_dim))
    }

    /// Appends another tape; both must share the same step.
    pub fn concat(&mut self, other: &ControlTape) {
        assert!(
            (self.dt - other.dt).abs() < 1e-12,
            "cannot concatenate tapes with different steps"
        );
        self.controls.extend(other.controls.iter().cloned());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Velocity-controlled point robot in the plane.
    SingleIntegrator { b: f64 },
    /// Fixed-speed car controlled by turn rate.
    Dubins { v: f64, rho: f64, b: f64 },
}

/// A control-affine SDE with quadratic control cost, uniform state cost rate
/// and first-exit terminal cost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdeModel {
    pub kind: ModelKind,
    pub state_dim: usize,
    pub control_dim: usize,
    /// Uniform state cost rate q.
    pub state_cost: f64,
    /// Scalar control cost weight: R = r·I.
    pub control_cost: f64,
    /// Terminal cost on non-goal exits; goal exits cost 0.
    pub phi_fail: f64,
    /// Noise-compatibility scalar, derived from the model constants.
    pub lambda: f64,
    /// Simulation step.
    pub dt: f64,
}

/// Result of an exact two-point connection.
#[derive(Clone, Debug)]
pub struct Connection {
    pub traj: Trajectory,
    pub tape: ControlTape,
    pub cost: f64,
}

impl SdeModel {
    /// Planar single integrator: f = 0, G = I₂, B = b·I₂, q = 1, R = 2·I₂,
    /// infinite cost on non-goal exits. λ = r·b².
    pub fn single_integrator(b: f64, dt: f64) -> Self {
        assert!(b > 0.0 && dt > 0.0);
        let (q, r) = (1.0, 2.0);
        SdeModel {
            kind: ModelKind::SingleIntegrator { b },
            state_dim: 2,
            control_dim: 2,
            state_cost: q,
            control_cost: r,
            phi_fail: f64::INFINITY,
            lambda: r * b * b,
            dt,
        }
    }

    /// Car with constant speed V and turn-rate control: f = [V·cosθ, V·sinθ, 0],
    /// G = [0, 0, 1/ρ]', B = [0, 0, b]', q = R = 1, 1000 on non-goal exits.
    /// λ = r·b²·ρ².
    pub fn dubins(v: f64, rho: f64, b: f64, dt: f64) -> Self {
        assert!(v > 0.0 && rho > 0.0 && b > 0.0 && dt > 0.0);
        let (q, r) = (1.0, 1.0);
        SdeModel {
            kind: ModelKind::Dubins { v, rho, b },
            state_dim: 3,
            control_dim: 1,
            state_cost: q,
            control_cost: r,
            phi_fail: 1000.0,
            lambda: r * b * b * rho * rho,
            dt,
        }
    }

    /// Overrides the cost constants; λ is re-derived so the noise constraint
    /// keeps holding.
    pub fn with_costs(mut self, state_cost: f64, control_cost: f64) -> Self {
        assert!(state_cost >= 0.0 && control_cost > 0.0);
        self.state_cost = state_cost;
        self.control_cost = control_cost;
        self.lambda = match self.kind {
            ModelKind::SingleIntegrator { b } => control_cost * b * b,
            ModelKind::Dubins { rho, b, .. } => control_cost * b * b * rho * rho,
        };
        self
    }

    pub fn with_phi_fail(mut self, phi_fail: f64) -> Self {
        self.phi_fail = phi_fail;
        self
    }

    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            ModelKind::SingleIntegrator { .. } => DVector::zeros(2),
            ModelKind::Dubins { v, .. } => {
                DVector::from_vec(vec![v * x[2].cos(), v * x[2].sin(), 0.0])
            }
        }
    }

    /// Full n×m control map G(x); only the bottom m×m block is nonzero.
    pub fn control_map(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self.kind {
            ModelKind::SingleIntegrator { .. } => DMatrix::identity(2, 2),
            ModelKind::Dubins { rho, .. } => {
                DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0 / rho])
            }
        }
    }

    /// Full n×m diffusion map B(x); only the bottom m×m block is nonzero.
    pub fn diffusion(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self.kind {
            ModelKind::SingleIntegrator { b } => DMatrix::identity(2, 2) * b,
            ModelKind::Dubins { b, .. } => DMatrix::from_column_slice(3, 1, &[0.0, 0.0, b]),
        }
    }

    /// Invertible bottom block G_c(x) of the control map.
    pub fn g_c(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self.kind {
            ModelKind::SingleIntegrator { .. } => DMatrix::identity(2, 2),
            ModelKind::Dubins { rho, .. } => DMatrix::from_element(1, 1, 1.0 / rho),
        }
    }

    /// Invertible bottom block B_c(x) of the diffusion map.
    pub fn b_c(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self.kind {
            ModelKind::SingleIntegrator { b } => DMatrix::identity(2, 2) * b,
            ModelKind::Dubins { b, .. } => DMatrix::from_element(1, 1, b),
        }
    }

    pub fn control_cost_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.control_dim, self.control_dim) * self.control_cost
    }

    pub fn q(&self, _x: &DVector<f64>) -> f64 {
        self.state_cost
    }

    /// Terminal cost of an exit; `goal_reached` already folds in any heading
    /// tolerance checked by the caller.
    pub fn terminal_cost(&self, goal_reached: bool) -> f64 {
        if goal_reached {
            0.0
        } else {
            self.phi_fail
        }
    }

    pub fn position_of(&self, x: &DVector<f64>) -> Point {
        Point::new(x[0], x[1])
    }

    /// Frobenius norm of λ·G_c·R⁻¹·G_c' − B_c·B_c' at `x`; zero by
    /// construction for the built-in models.
    pub fn lambda_residual(&self, x: &DVector<f64>) -> f64 {
        let g_c = self.g_c(x);
        let b_c = self.b_c(x);
        let r_inv = DMatrix::identity(self.control_dim, self.control_dim) / self.control_cost;
        let lhs = &g_c * r_inv * g_c.transpose() * self.lambda;
        let rhs = &b_c * b_c.transpose();
        (lhs - rhs).norm()
    }

    /// One Euler–Maruyama step: x + f·dt + G·u·dt + B·z·√dt.
    pub fn em_step(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        z: &DVector<f64>,
        dt: f64,
    ) -> Result<DVector<f64>, DynamicsError> {
        debug_assert!(dt > 0.0);
        let next = x
            + self.drift(x) * dt
            + self.control_map(x) * u * dt
            + self.diffusion(x) * z * dt.sqrt();
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(DynamicsError::NonFiniteState)
        }
    }

    /// Obstacle-free optimal connection from `x1` to `x2`.
    ///
    /// Integrator: straight line at the constant speed minimizing
    /// ∫(q + ½u'Ru)dt, which is √(2q/r). Dubins: minimum-length curve among
    /// the six candidate words with |u| ≤ 1.
    pub fn tpbvp(&self, x1: &DVector<f64>, x2: &DVector<f64>) -> Connection {
        match self.kind {
            ModelKind::SingleIntegrator { .. } => self.integrator_connection(x1, x2),
            ModelKind::Dubins { v, rho, .. } => self.dubins_connection(x1, x2, v, rho),
        }
    }

    fn integrator_connection(&self, x1: &DVector<f64>, x2: &DVector<f64>) -> Connection {
        let disp = x2 - x1;
        let dist = disp.norm();
        if dist < 1e-12 {
            return Connection {
                traj: Trajectory::single(x1.clone()),
                tape: ControlTape::empty(self.dt),
                cost: 0.0,
            };
        }
        let speed = (2.0 * self.state_cost / self.control_cost).sqrt();
        let n_steps = ((dist / speed / self.dt).round() as usize).max(1);
        let u = &disp / (n_steps as f64 * self.dt);
        let mut times = Vec::with_capacity(n_steps + 1);
        let mut states = Vec::with_capacity(n_steps + 1);
        for i in 0..=n_steps {
            times.push(i as f64 * self.dt);
            states.push(x1 + &disp * (i as f64 / n_steps as f64));
        }
        let controls: Vec<DVector<f64>> = (0..n_steps).map(|_| u.clone()).collect();
        let cost = n_steps as f64
            * self.dt
            * (self.state_cost + 0.5 * self.control_cost * u.norm_squared());
        Connection {
            traj: Trajectory::new(times, states, Some(controls.clone())).unwrap(),
            tape: ControlTape { dt: self.dt, controls },
            cost,
        }
    }

    fn dubins_connection(&self, x1: &DVector<f64>, x2: &DVector<f64>, v: f64, rho: f64) -> Connection {
        // |u| <= 1 bounds the turn rate at 1/rho, i.e. a radius of v*rho.
        let radius = v * rho;
        let path = dubins::shortest([x1[0], x1[1], x1[2]], [x2[0], x2[1], x2[2]], radius);
        let total_len = path.total_length();
        let duration = total_len / v;
        if duration < 1e-12 {
            return Connection {
                traj: Trajectory::single(x1.clone()),
                tape: ControlTape::empty(self.dt),
                cost: 0.0,
            };
        }

        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut t = 0.0;
        while t < duration - 1e-12 {
            let q = path.sample(t * v);
            times.push(t);
            states.push(DVector::from_vec(vec![q[0], q[1], q[2]]));
            t += self.dt;
        }
        times.push(duration);
        let qe = path.endpoint();
        states.push(DVector::from_vec(vec![qe[0], qe[1], qe[2]]));

        let n_tape = ((duration / self.dt).round() as usize).max(1);
        let controls: Vec<DVector<f64>> = (0..n_tape)
            .map(|i| {
                let s_mid = ((i as f64 + 0.5) * self.dt * v).min(total_len);
                let u = match path.segment_at(s_mid) {
                    Segment::Left => 1.0,
                    Segment::Straight => 0.0,
                    Segment::Right => -1.0,
                };
                DVector::from_element(1, u)
            })
            .collect();

        // Deterministic connection cost convention: unit time cost, no
        // control penalty, so cost equals the traversal time.
        Connection {
            traj: Trajectory::new(times, states, None).unwrap(),
            tape: ControlTape { dt: self.dt, controls },
            cost: duration,
        }
    }

    /// Realized cost of a trajectory/tape pair: terminal cost of the final
    /// state's exit class plus the accumulated running cost.
    pub fn rollout_cost(&self, traj: &Trajectory, tape: &ControlTape, env: &Workspace) -> f64 {
        let mut running = 0.0;
        for (i, x) in traj.states.iter().take(tape.len()).enumerate() {
            let u = tape.control_at(i, self.control_dim);
            running += (self.q(x) + 0.5 * self.control_cost * u.norm_squared()) * tape.dt;
        }
        let last = traj.last_state();
        let exit = env.classify_exit(self.position_of(last));
        let goal_reached = exit == ExitClass::GoalBoundary
            && (self.state_dim < 3 || env.goal.heading_ok(last[2]));
        self.terminal_cost(goal_reached) + running
    }
}
