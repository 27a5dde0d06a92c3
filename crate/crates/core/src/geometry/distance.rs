//! Object-to-object distances.
//!
//! Surface distance between two sampled objects is the minimum over all
//! sample pairs, which also covers concave shapes. Otherwise the two boxes
//! are used. Both routes are exact and symmetric in their arguments.

use serde::{Deserialize, Serialize};

use super::{GeometryError, KdTree, OrientedBox, Rect2, Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    Centroid,
    #[default]
    Surface,
}

/// Borrowed view of the geometry of one object.
#[derive(Debug, Clone, Copy)]
pub struct ObjectGeometry<'a> {
    pub centroid: Vec3,
    pub obb: Option<&'a OrientedBox>,
    pub samples: Option<&'a [Vec3]>,
}

pub fn distance(
    a: &ObjectGeometry<'_>,
    b: &ObjectGeometry<'_>,
    mode: DistanceMode,
) -> Result<f64, GeometryError> {
    match mode {
        DistanceMode::Centroid => Ok((a.centroid - b.centroid).norm()),
        DistanceMode::Surface => match (a.samples, b.samples, a.obb, b.obb) {
            (Some(sa), Some(sb), _, _) if !sa.is_empty() && !sb.is_empty() => {
                Ok(sample_set_distance(sa, sb))
            }
            (_, _, Some(ba), Some(bb)) => Ok(obb_distance(ba, bb)),
            _ => Err(GeometryError::MissingGeometry),
        },
    }
}

/// Minimum Euclidean distance over all pairs drawn from `a` and `b`.
pub fn sample_set_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let (indexed, queries) = if b.len() >= a.len() { (b, a) } else { (a, b) };
    let tree = KdTree::new(indexed);
    let mut best = f64::INFINITY;
    for q in queries {
        best = tree.nearest_squared_within(q, best);
        if best == 0.0 {
            break;
        }
    }
    best.sqrt()
}

fn segment_point_distance(a: &Vec2, b: &Vec2, p: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + ab * t - p).norm()
}

fn rect_corners(r: &Rect2) -> [Vec2; 4] {
    let (u, v) = r.axes();
    let (hx, hy) = (r.half_extents.x, r.half_extents.y);
    [
        r.center - u * hx - v * hy,
        r.center + u * hx - v * hy,
        r.center + u * hx + v * hy,
        r.center - u * hx + v * hy,
    ]
}

fn rects_overlap(a: &Rect2, b: &Rect2) -> bool {
    let (ca, cb) = (rect_corners(a), rect_corners(b));
    let (au, av) = a.axes();
    let (bu, bv) = b.axes();
    [au, av, bu, bv].iter().all(|axis| {
        let proj = |cs: &[Vec2; 4]| {
            cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                let d = c.dot(axis);
                (lo.min(d), hi.max(d))
            })
        };
        let (a_lo, a_hi) = proj(&ca);
        let (b_lo, b_hi) = proj(&cb);
        a_lo <= b_hi && b_lo <= a_hi
    })
}

fn rect_distance(a: &Rect2, b: &Rect2) -> f64 {
    if rects_overlap(a, b) {
        return 0.0;
    }
    let (ca, cb) = (rect_corners(a), rect_corners(b));
    let mut best = f64::INFINITY;
    for (poly, pts) in [(&ca, &cb), (&cb, &ca)] {
        for i in 0..4 {
            for p in pts.iter() {
                best = best.min(segment_point_distance(&poly[i], &poly[(i + 1) % 4], p));
            }
        }
    }
    best
}

/// Exact distance between two gravity-aligned boxes.
///
/// Both boxes are prisms over their footprints, so their Minkowski
/// difference is the footprint difference times the z-interval difference
/// and the distance splits into a plan-view and a vertical component.
pub fn obb_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (a_lo, a_hi) = a.z_range();
    let (b_lo, b_hi) = b.z_range();
    let dz = (b_lo - a_hi).max(a_lo - b_hi).max(0.0);
    let dxy = rect_distance(&a.footprint(), &b.footprint()).min(rect_distance(&b.footprint(), &a.footprint()));
    (dxy * dxy + dz * dz).sqrt()
}
