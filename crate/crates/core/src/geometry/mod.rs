//! Deterministic geometry kernel.
//!
//! Conventions: meters, right-handed world frame, gravity along -z (so the
//! up axis is +z). Oriented boxes are gravity aligned and carry only a yaw.

mod distance;
mod frame;
mod hull;
mod kdtree;
mod obb;
mod rect;

pub use distance::{distance, obb_distance, sample_set_distance, DistanceMode, ObjectGeometry};
pub use frame::{
    build_egocentric_frame, classify_direction, Difficulty, DirectionLabel, Frame,
};
pub use hull::{check_non_coplanar, convex_hull_3d, ConvexHull};
pub use kdtree::KdTree;
pub use obb::{obb_fit, AxisAlignedBox, OrientedBox};
pub use rect::{convex_hull_2d, min_area_rect_2d, point_in_polygon, polygon_area, Rect2};

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

/// Absolute tolerance for exact linear-algebra identities.
pub const LINEAR_TOL: f64 = 1e-9;
/// Relative tolerance for derived scalar attributes.
pub const RELATIVE_TOL: f64 = 1e-6;

/// World up axis. Gravity points along its negation.
pub fn up_axis() -> Vec3 {
    Vec3::z()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("input contains a non-finite coordinate")]
    NonFinite,
    #[error("points are coincident")]
    Coincident,
    #[error("points are collinear")]
    Collinear,
    #[error("points are coplanar")]
    Coplanar,
    #[error("polygon repeats vertex {0}")]
    RepeatedVertex(usize),
    #[error("degenerate frame: standing and facing points coincide in plan view")]
    DegenerateFrame,
    #[error("degenerate direction: point lies on the vertical axis of the frame")]
    DegenerateDirection,
    #[error("object has no geometry for surface distance")]
    MissingGeometry,
    #[error("hull construction failed: {0}")]
    Topology(&'static str),
}

pub(crate) fn all_finite3(points: &[Vec3]) -> bool {
    points.iter().all(|p| p.iter().all(|c| c.is_finite()))
}

/// Length of the diagonal of the bounding box of `points`, never zero.
pub(crate) fn extent_scale(points: &[Vec3]) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let diag = (hi - lo).norm();
    if diag.is_finite() && diag > 0.0 {
        diag
    } else {
        1.0
    }
}
