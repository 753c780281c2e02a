//! Planning domain: bounds, obstacles, goal region, and collision queries.
//!
//! The free interior excludes the outer boundary, all obstacles and the goal
//! region; reaching any of them is a first-exit event. Obstacles carry a
//! representative point used by the topology module, and their list order is
//! stable (it defines the component order of signatures).

use crate::geometry::{
    point_in_convex_polygon, point_in_convex_polygon_interior, polygon_disc_distance,
    polygon_polygon_distance, segment_intersects_disc, segment_intersects_polygon, Point, Rect,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default chord length above which trajectory collision checks refuse to run.
pub const DEFAULT_COLLISION_RESOLUTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("consecutive trajectory samples {0:.4} apart exceed collision resolution {1:.4}")]
    ChordTooCoarse(f64, f64),
    #[error("invalid workspace: {0}")]
    InvalidWorkspace(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObstacleShape {
    Disc { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// One logical obstacle: a convex shape plus its representative point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Obstacle {
    #[serde(flatten)]
    pub shape: ObstacleShape,
    pub rep: [f64; 2],
}

impl Obstacle {
    pub fn rep_point(&self) -> Point {
        self.rep.into()
    }

    pub fn contains(&self, p: Point) -> bool {
        match &self.shape {
            ObstacleShape::Disc { center, radius } => {
                p.dist_sq((*center).into()) <= radius * radius
            }
            ObstacleShape::Polygon { vertices } => {
                let verts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                point_in_convex_polygon(p, &verts)
            }
        }
    }

    fn contains_interior(&self, p: Point) -> bool {
        match &self.shape {
            ObstacleShape::Disc { center, radius } => p.dist_sq((*center).into()) < radius * radius,
            ObstacleShape::Polygon { vertices } => {
                let verts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                point_in_convex_polygon_interior(p, &verts)
            }
        }
    }

    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        match &self.shape {
            ObstacleShape::Disc { center, radius } => {
                segment_intersects_disc(a, b, (*center).into(), *radius)
            }
            ObstacleShape::Polygon { vertices } => {
                let verts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                segment_intersects_polygon(a, b, &verts)
            }
        }
    }

    fn distance_to(&self, other: &Obstacle) -> f64 {
        match (&self.shape, &other.shape) {
            (
                ObstacleShape::Disc { center: c1, radius: r1 },
                ObstacleShape::Disc { center: c2, radius: r2 },
            ) => (Point::from(*c1).dist((*c2).into()) - r1 - r2).max(0.0),
            (ObstacleShape::Polygon { vertices }, ObstacleShape::Disc { center, radius })
            | (ObstacleShape::Disc { center, radius }, ObstacleShape::Polygon { vertices }) => {
                let verts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                polygon_disc_distance(&verts, (*center).into(), *radius)
            }
            (ObstacleShape::Polygon { vertices: va }, ObstacleShape::Polygon { vertices: vb }) => {
                let pa: Vec<Point> = va.iter().map(|&v| v.into()).collect();
                let pb: Vec<Point> = vb.iter().map(|&v| v.into()).collect();
                polygon_polygon_distance(&pa, &pb)
            }
        }
    }
}

/// Disc-shaped goal region; the representative point defaults to the center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<[f64; 2]>,
    /// Optional heading interval (radians) applied by callers for 3D-state models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<[f64; 2]>,
}

impl GoalRegion {
    pub fn rep_point(&self) -> Point {
        self.rep.unwrap_or(self.center).into()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.dist_sq(self.center.into()) <= self.radius * self.radius
    }

    /// Whether a heading satisfies the goal's heading interval, if one is set.
    pub fn heading_ok(&self, theta: f64) -> bool {
        match self.heading {
            None => true,
            Some([lo, hi]) => {
                let t = wrap_angle(theta);
                if lo <= hi {
                    t >= lo && t <= hi
                } else {
                    t >= lo || t <= hi
                }
            }
        }
    }
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = t % two_pi;
    if t > std::f64::consts::PI {
        t -= two_pi;
    } else if t <= -std::f64::consts::PI {
        t += two_pi;
    }
    t
}

/// Where a state sits relative to the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitClass {
    Interior,
    GoalBoundary,
    ObstacleOrOuterBoundary,
}

/// The planning domain: bounds, obstacle set and goal region.
///
/// Immutable after construction; safe to share across rollout workers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Workspace {
    pub bounds: Rect,
    pub obstacles: Vec<Obstacle>,
    pub goal: GoalRegion,
    #[serde(default = "default_resolution")]
    pub collision_resolution: f64,
}

fn default_resolution() -> f64 {
    DEFAULT_COLLISION_RESOLUTION
}

impl Workspace {
    pub fn new(bounds: Rect, obstacles: Vec<Obstacle>, goal: GoalRegion) -> Result<Self, EnvError> {
        let ws = Workspace {
            bounds,
            obstacles,
            goal,
            collision_resolution: DEFAULT_COLLISION_RESOLUTION,
        };
        ws.check_invariants()?;
        Ok(ws)
    }

    /// Validates the construction invariants; also used by the `validate` CLI.
    pub fn check_invariants(&self) -> Result<(), EnvError> {
        if !(self.bounds.min.x < self.bounds.max.x && self.bounds.min.y < self.bounds.max.y) {
            return Err(EnvError::InvalidWorkspace("degenerate bounds".into()));
        }
        if self.goal.radius <= 0.0 {
            return Err(EnvError::InvalidWorkspace("goal radius must be > 0".into()));
        }
        for (i, ob) in self.obstacles.iter().enumerate() {
            if !ob.contains_interior(ob.rep_point()) {
                return Err(EnvError::InvalidWorkspace(format!(
                    "representative point of obstacle {i} is not strictly inside its shape"
                )));
            }
            if !self.obstacle_in_bounds(ob) {
                return Err(EnvError::InvalidWorkspace(format!(
                    "obstacle {i} is not contained in the bounds"
                )));
            }
            let goal_dist = match &ob.shape {
                ObstacleShape::Disc { center, radius } => {
                    (Point::from(*center).dist(self.goal.center.into())
                        - radius
                        - self.goal.radius)
                        .max(0.0)
                }
                ObstacleShape::Polygon { vertices } => {
                    let verts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                    polygon_disc_distance(&verts, self.goal.center.into(), self.goal.radius)
                }
            };
            if goal_dist <= 0.0 {
                return Err(EnvError::InvalidWorkspace(format!(
                    "obstacle {i} overlaps the goal region"
                )));
            }
            for (j, other) in self.obstacles.iter().enumerate().skip(i + 1) {
                if ob.distance_to(other) <= 0.0 {
                    return Err(EnvError::InvalidWorkspace(format!(
                        "obstacles {i} and {j} are not disjoint"
                    )));
                }
            }
        }
        Ok(())
    }

    fn obstacle_in_bounds(&self, ob: &Obstacle) -> bool {
        match &ob.shape {
            ObstacleShape::Disc { center, radius } => {
                let c = Point::from(*center);
                c.x - radius >= self.bounds.min.x
                    && c.x + radius <= self.bounds.max.x
                    && c.y - radius >= self.bounds.min.y
                    && c.y + radius <= self.bounds.max.y
            }
            ObstacleShape::Polygon { vertices } => vertices
                .iter()
                .all(|&v| self.bounds.contains_closed(v.into())),
        }
    }

    /// True iff `p` is in the open free interior: strictly inside bounds,
    /// outside every obstacle and outside the goal region.
    pub fn contains_free(&self, p: Point) -> bool {
        self.bounds.contains_interior(p)
            && !self.goal.contains(p)
            && !self.obstacles.iter().any(|ob| ob.contains(p))
    }

    /// First-exit classification of a position.
    pub fn classify_exit(&self, p: Point) -> ExitClass {
        if self.contains_free(p) {
            ExitClass::Interior
        } else if self.goal.contains(p) {
            ExitClass::GoalBoundary
        } else {
            ExitClass::ObstacleOrOuterBoundary
        }
    }

    /// True iff the closed segment `[a, b]` avoids every obstacle and stays in
    /// bounds. The goal region is not an obstacle here. Checked analytically:
    /// no sampling along the segment.
    pub fn segment_free(&self, a: Point, b: Point) -> bool {
        if !self.bounds.contains_closed(a) || !self.bounds.contains_closed(b) {
            return false;
        }
        !self.obstacles.iter().any(|ob| ob.intersects_segment(a, b))
    }

    /// Chord-wise collision check of a sampled position path. Fails with
    /// `ChordTooCoarse` when the sampling is wider than `collision_resolution`
    /// so the caller knows to densify; straight chords themselves are exact.
    pub fn trajectory_free(&self, positions: &[Point]) -> Result<bool, EnvError> {
        assert!(!positions.is_empty(), "trajectory must have at least one sample");
        if positions.len() == 1 {
            return Ok(self.segment_free(positions[0], positions[0]));
        }
        for w in positions.windows(2) {
            let gap = w[0].dist(w[1]);
            // tiny slack so a chord of exactly the resolution never trips on rounding
            if gap > self.collision_resolution * (1.0 + 1e-9) {
                return Err(EnvError::ChordTooCoarse(gap, self.collision_resolution));
            }
            if !self.segment_free(w[0], w[1]) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Collision check for straight-line paths, where chord length is no
    /// accuracy concern: a single analytic segment query.
    pub fn straight_path_free(&self, a: Point, b: Point) -> bool {
        self.segment_free(a, b)
    }

    pub fn rep_points(&self) -> Vec<Point> {
        self.obstacles.iter().map(|o| o.rep_point()).collect()
    }

    pub fn num_obstacles(&self) -> usize {
        self.obstacles.len()
    }

    pub fn diagonal(&self) -> f64 {
        self.bounds.diagonal()
    }
}
