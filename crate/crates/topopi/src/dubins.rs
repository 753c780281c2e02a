//! Shortest bounded-curvature (Dubins) curves between planar poses.
//!
//! All six candidate words are evaluated in normalized coordinates; each
//! candidate is verified by forward construction before it may compete, so a
//! numerically infeasible word can only drop out, never win with a bogus
//! endpoint. The shortest verified candidate is returned.

use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Word {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl Word {
    pub const ALL: [Word; 6] = [Word::Lsl, Word::Rsr, Word::Lsr, Word::Rsl, Word::Rlr, Word::Lrl];

    pub fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            Word::Lsl => [Left, Straight, Left],
            Word::Rsr => [Right, Straight, Right],
            Word::Lsr => [Left, Straight, Right],
            Word::Rsl => [Right, Straight, Left],
            Word::Rlr => [Right, Left, Right],
            Word::Lrl => [Left, Right, Left],
        }
    }
}

/// A concrete Dubins curve: word plus per-segment lengths in world units.
#[derive(Clone, Debug)]
pub struct DubinsPath {
    pub start: [f64; 3],
    pub rho: f64,
    pub word: Word,
    pub lengths: [f64; 3],
}

fn mod2pi(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).floor();
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

fn wrap_pi(x: f64) -> f64 {
    let mut r = mod2pi(x);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Advance a pose along one segment by arc length `s`.
fn apply_segment(q: [f64; 3], seg: Segment, s: f64, rho: f64) -> [f64; 3] {
    let [x, y, theta] = q;
    match seg {
        Segment::Straight => [x + s * theta.cos(), y + s * theta.sin(), theta],
        Segment::Left => {
            let t1 = theta + s / rho;
            [x + rho * (t1.sin() - theta.sin()), y + rho * (theta.cos() - t1.cos()), t1]
        }
        Segment::Right => {
            let t1 = theta - s / rho;
            [x + rho * (theta.sin() - t1.sin()), y + rho * (t1.cos() - theta.cos()), t1]
        }
    }
}

impl DubinsPath {
    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Pose after arc length `s` from the start (clamped to the path).
    pub fn sample(&self, s: f64) -> [f64; 3] {
        let mut remaining = s.clamp(0.0, self.total_length());
        let mut q = self.start;
        for (seg, &len) in self.word.segments().iter().zip(&self.lengths) {
            if remaining <= len {
                return apply_segment(q, *seg, remaining, self.rho);
            }
            q = apply_segment(q, *seg, len, self.rho);
            remaining -= len;
        }
        q
    }

    pub fn endpoint(&self) -> [f64; 3] {
        self.sample(self.total_length())
    }

    /// Segment type active at arc length `s`.
    pub fn segment_at(&self, s: f64) -> Segment {
        let mut remaining = s.clamp(0.0, self.total_length());
        let segs = self.word.segments();
        for (seg, &len) in segs.iter().zip(&self.lengths) {
            if remaining <= len {
                return *seg;
            }
            remaining -= len;
        }
        segs[2]
    }
}

/// Normalized word equations. Input: normalized distance `d` and the start /
/// goal headings `alpha`, `beta` measured from the start-to-goal direction.
/// Output (t, p, q) in normalized units, or None when the word is infeasible.
fn word_params(word: Word, alpha: f64, beta: f64, d: f64) -> Option<(f64, f64, f64)> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let c_ab = (alpha - beta).cos();
    match word {
        Word::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = f64::atan2(cb - ca, d + sa - sb);
            Some((mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)))
        }
        Word::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = f64::atan2(ca - cb, d - sa + sb);
            Some((mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)))
        }
        Word::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = f64::atan2(-ca - cb, d + sa + sb) - f64::atan2(-2.0, p);
            Some((mod2pi(tmp - alpha), p, mod2pi(tmp - mod2pi(beta))))
        }
        Word::Rsl => {
            let p_sq = d * d - 2.0 + 2.0 * c_ab - 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = f64::atan2(ca + cb, d - sa - sb) - f64::atan2(2.0, p);
            Some((mod2pi(alpha - tmp), p, mod2pi(beta - tmp)))
        }
        Word::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - f64::atan2(ca - cb, d - sa + sb) + mod2pi(p / 2.0));
            Some((t, p, mod2pi(alpha - beta - t + mod2pi(p))))
        }
        Word::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - f64::atan2(ca - cb, d + sa - sb) + p / 2.0);
            Some((t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))))
        }
    }
}

const ENDPOINT_CHECK_TOL: f64 = 1e-7;

/// Every feasible, endpoint-verified candidate word between the two poses.
pub fn candidates(q0: [f64; 3], q1: [f64; 3], rho: f64) -> Vec<DubinsPath> {
    assert!(rho > 0.0);
    let dx = q1[0] - q0[0];
    let dy = q1[1] - q0[1];
    let d = dx.hypot(dy) / rho;
    let phi = if d > 1e-14 { f64::atan2(dy, dx) } else { q0[2] };
    let alpha = mod2pi(q0[2] - phi);
    let beta = mod2pi(q1[2] - phi);

    let mut out = Vec::new();
    for word in Word::ALL {
        if let Some((t, p, q)) = word_params(word, alpha, beta, d) {
            let path = DubinsPath {
                start: q0,
                rho,
                word,
                lengths: [t * rho, p * rho, q * rho],
            };
            let e = path.endpoint();
            let ok = (e[0] - q1[0]).hypot(e[1] - q1[1]) < ENDPOINT_CHECK_TOL * (1.0 + rho)
                && wrap_pi(e[2] - q1[2]).abs() < ENDPOINT_CHECK_TOL;
            if ok {
                out.push(path);
            }
        }
    }
    out
}

/// Minimum-length Dubins curve between two poses. The two built-in systems
/// are complete: at least one word is always feasible.
pub fn shortest(q0: [f64; 3], q1: [f64; 3], rho: f64) -> DubinsPath {
    candidates(q0, q1, rho)
        .into_iter()
        .min_by(|a, b| a.total_length().total_cmp(&b.total_length()))
        .expect("no feasible Dubins word; endpoint verification tolerance too tight")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn straight_word() {
        let p = shortest([0.0, 0.0, 0.0], [4.0, 0.0, 0.0], 1.0);
        assert_abs_diff_eq!(p.total_length(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn half_right_turn() {
        let p = shortest([0.0, 0.0, 0.0], [0.0, -2.0, PI], 1.0);
        assert_abs_diff_eq!(p.total_length(), PI, epsilon = 1e-9);
    }

    #[test]
    fn zero_distance() {
        let p = shortest([1.0, 2.0, 0.5], [1.0, 2.0, 0.5], 1.0);
        assert!(p.total_length() < 1e-9);
    }

    #[test]
    fn random_pairs_reach_endpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let q0 = [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-PI..PI),
            ];
            let q1 = [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-PI..PI),
            ];
            let p = shortest(q0, q1, 1.0);
            let e = p.endpoint();
            assert_abs_diff_eq!(e[0], q1[0], epsilon = 1e-8);
            assert_abs_diff_eq!(e[1], q1[1], epsilon = 1e-8);
            assert!(wrap_pi(e[2] - q1[2]).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_is_continuous() {
        let p = shortest([0.0, 0.0, 0.3], [3.0, 2.0, -1.1], 1.0);
        let mut prev = p.sample(0.0);
        let n = 200;
        for i in 1..=n {
            let s = p.total_length() * i as f64 / n as f64;
            let cur = p.sample(s);
            let step = p.total_length() / n as f64;
            let dist = (cur[0] - prev[0]).hypot(cur[1] - prev[1]);
            assert!(dist <= step + 1e-9);
            prev = cur;
        }
    }
}
