//! H-signatures: per-obstacle winding fractions identifying the homology
//! class of a planar path.
//!
//! For a path z(t) and obstacle representative point ζ the component is
//! (1/2π)·Im ∫ dz/(z−ζ), the continuous winding of the path around ζ. Straight
//! chords admit a closed form: the principal argument difference folded back
//! by the multiple of 2π of smallest absolute value. Signatures add under
//! concatenation and close to integers (the winding number) on loops.

use crate::env::Workspace;
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Default tolerance for the homology equality test. Distinct classes differ
/// by at least 1 in some component (winding integrality), so this cleanly
/// separates classes while absorbing accumulated float error.
pub const HOMOLOGY_TOL: f64 = 0.05;

/// Chords are split until they subtend less than this angle at every
/// representative point, keeping the closed-form branch choice unambiguous.
const MAX_SUBTENDED_ANGLE: f64 = PI / 4.0;

const MAX_SPLIT_DEPTH: u32 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("segment endpoint coincides with representative point of obstacle {0}")]
    DegenerateSegment(usize),
    #[error("signature length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Vector of winding fractions, one component per logical obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HSignature(pub Vec<f64>);

impl HSignature {
    pub fn zeros(n: usize) -> Self {
        HSignature(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        HSignature(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &HSignature) -> HSignature {
        debug_assert_eq!(self.len(), other.len());
        HSignature(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> HSignature {
        HSignature(self.0.iter().map(|a| -a).collect())
    }
}

impl std::fmt::Display for HSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:.9}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Candidate of minimum absolute value; exact ties between `a` and `-a`
/// break toward the positive one.
pub fn absmin(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut best: Option<f64> = None;
    for v in values {
        best = Some(match best {
            None => v,
            Some(b) => {
                if v.abs() < b.abs() || (v.abs() == b.abs() && v > b) {
                    v
                } else {
                    b
                }
            }
        });
    }
    best.expect("absmin over empty candidate set")
}

fn chord_component(a: Point, b: Point, rep: Point) -> f64 {
    let a1 = f64::atan2(a.y - rep.y, a.x - rep.x);
    let a2 = f64::atan2(b.y - rep.y, b.x - rep.x);
    let delta = a2 - a1;
    absmin((-2i32..=2).map(|k| delta + f64::from(k) * TAU)) / TAU
}

/// Angle subtended by the chord `[a, b]` at `rep`, in [0, π].
fn subtended_angle(a: Point, b: Point, rep: Point) -> f64 {
    let ux = a.x - rep.x;
    let uy = a.y - rep.y;
    let vx = b.x - rep.x;
    let vy = b.y - rep.y;
    let cross = ux * vy - uy * vx;
    let dot = ux * vx + uy * vy;
    f64::atan2(cross.abs(), dot)
}

/// Closed-form signature of the straight segment `[z1, z2]`.
///
/// The caller guarantees the segment avoids all obstacles; the chord is split
/// internally until each piece subtends less than π/4 at every representative
/// point, which keeps the folded argument difference on the correct branch.
pub fn segment_signature(z1: Point, z2: Point, ws: &Workspace) -> Result<HSignature, TopologyError> {
    let reps = ws.rep_points();
    let mut components = vec![0.0; reps.len()];
    for (l, &rep) in reps.iter().enumerate() {
        components[l] = chord_winding(z1, z2, rep, l)?;
    }
    Ok(HSignature(components))
}

fn chord_winding(a: Point, b: Point, rep: Point, index: usize) -> Result<f64, TopologyError> {
    fn go(a: Point, b: Point, rep: Point, index: usize, depth: u32) -> Result<f64, TopologyError> {
        if (a.x == rep.x && a.y == rep.y) || (b.x == rep.x && b.y == rep.y) {
            return Err(TopologyError::DegenerateSegment(index));
        }
        if a.x == b.x && a.y == b.y {
            return Ok(0.0);
        }
        if subtended_angle(a, b, rep) < MAX_SUBTENDED_ANGLE {
            return Ok(chord_component(a, b, rep));
        }
        if depth >= MAX_SPLIT_DEPTH {
            // Splitting never reduced the subtended angle: the chord passes
            // through (or numerically through) the representative point.
            return Err(TopologyError::DegenerateSegment(index));
        }
        let m = a.midpoint(b);
        Ok(go(a, m, rep, index, depth + 1)? + go(m, b, rep, index, depth + 1)?)
    }
    go(a, b, rep, index, 0)
}

/// Signature of a sampled path: sum of chord signatures over consecutive
/// samples. Chords are densified internally, so sampling density only has to
/// avoid representative points, not resolve the winding.
pub fn path_signature(positions: &[Point], ws: &Workspace) -> Result<HSignature, TopologyError> {
    let reps = ws.rep_points();
    let n_chords = positions.len().saturating_sub(1);
    let mut components = Vec::with_capacity(reps.len());
    let mut windings = vec![0.0; n_chords];
    for (l, &rep) in reps.iter().enumerate() {
        for (i, w) in positions.windows(2).enumerate() {
            windings[i] = chord_winding(w[0], w[1], rep, l)?;
        }
        components.push(palindromic_sum(&windings));
    }
    Ok(HSignature(components))
}

/// Sums pairing the two ends inward. Each chord winding negates exactly under
/// path reversal, and this order maps onto itself, so the total negates
/// exactly too; a plain left fold would not.
fn palindromic_sum(vals: &[f64]) -> f64 {
    let n = vals.len();
    let mut total = 0.0;
    for i in 0..n / 2 {
        total += vals[i] + vals[n - 1 - i];
    }
    if n % 2 == 1 {
        total += vals[n / 2];
    }
    total
}

/// Componentwise equality within `tol` (use [`HOMOLOGY_TOL`] by default).
pub fn homologous(h1: &HSignature, h2: &HSignature, tol: f64) -> Result<bool, TopologyError> {
    if h1.len() != h2.len() {
        return Err(TopologyError::LengthMismatch(h1.len(), h2.len()));
    }
    Ok(h1
        .0
        .iter()
        .zip(&h2.0)
        .all(|(a, b)| (a - b).abs() <= tol))
}

/// Allowed/blocked split of the signature space: allowed means every
/// component lies within `h_limit` of the corresponding offset component.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassFilter {
    pub h_limit: f64,
    pub offset: HSignature,
}

impl ClassFilter {
    /// The conventional filter: offset is the all-ones vector.
    pub fn centered_on_ones(n_obstacles: usize, h_limit: f64) -> Self {
        ClassFilter { h_limit, offset: HSignature::ones(n_obstacles) }
    }

    pub fn is_allowed(&self, h: &HSignature) -> Result<bool, TopologyError> {
        if h.len() != self.offset.len() {
            return Err(TopologyError::LengthMismatch(h.len(), self.offset.len()));
        }
        Ok(self
            .offset
            .0
            .iter()
            .zip(&h.0)
            .all(|(o, z)| (o - z).abs() <= self.h_limit))
    }
}
