//! Planar helpers: convex hull, minimum-area enclosing rectangle, polygon
//! area and point-in-polygon.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::{GeometryError, Vec2};

/// An oriented rectangle in the plane. `half_extents.x` is measured along
/// the direction `yaw`, `half_extents.y` along the perpendicular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub center: Vec2,
    pub half_extents: Vec2,
    pub yaw: f64,
}

impl Rect2 {
    pub fn area(&self) -> f64 {
        4.0 * self.half_extents.x * self.half_extents.y
    }

    pub fn axes(&self) -> (Vec2, Vec2) {
        let (s, c) = self.yaw.sin_cos();
        (Vec2::new(c, s), Vec2::new(-s, c))
    }

    pub fn contains(&self, p: &Vec2, tol: f64) -> bool {
        let (u, v) = self.axes();
        let d = p - self.center;
        d.dot(&u).abs() <= self.half_extents.x + tol && d.dot(&v).abs() <= self.half_extents.y + tol
    }
}

fn cross(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// collinear vertices.
pub fn convex_hull_2d(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Maps a yaw to `[-pi/2, pi/2)`.
fn normalize_half_turn(yaw: f64) -> f64 {
    let y = (yaw + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if y >= FRAC_PI_2 - 1e-12 {
        y - PI
    } else {
        y
    }
}

/// Maps a yaw to `[-pi/4, pi/4)`, for squares.
fn normalize_quarter_turn(yaw: f64) -> f64 {
    let y = (yaw + FRAC_PI_4).rem_euclid(FRAC_PI_2) - FRAC_PI_4;
    if y >= FRAC_PI_4 - 1e-12 {
        y - FRAC_PI_2
    } else {
        y
    }
}

/// Minimum-area rectangle enclosing `points`, by rotating calipers over the
/// convex hull.
///
/// The result is canonical: the long side lies along `yaw`, and `yaw` is in
/// `[-pi/2, pi/2)`. Squares use `[-pi/4, pi/4)` instead.
pub fn min_area_rect_2d(points: &[Vec2]) -> Result<Rect2, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            need: 3,
            got: points.len(),
        });
    }
    if !points.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let hull = convex_hull_2d(points);
    if hull.len() < 3 {
        return Err(GeometryError::Collinear);
    }
    let n = hull.len();
    let next = |i: usize| (i + 1) % n;

    let edge_dir = |i: usize| (hull[next(i)] - hull[i]).normalize();
    let u0 = edge_dir(0);
    let v0 = Vec2::new(-u0.y, u0.x);
    let argext = |dir: &Vec2, max: bool| {
        (0..n)
            .max_by(|&a, &b| {
                let (da, db) = (hull[a].dot(dir), hull[b].dot(dir));
                if max {
                    da.total_cmp(&db)
                } else {
                    db.total_cmp(&da)
                }
            })
            .unwrap()
    };
    let mut right = argext(&u0, true);
    let mut top = argext(&v0, true);
    let mut left = argext(&u0, false);

    let mut best: Option<(f64, Rect2)> = None;
    for i in 0..n {
        let u = edge_dir(i);
        let v = Vec2::new(-u.y, u.x);
        while (hull[next(right)] - hull[right]).dot(&u) > 0.0 {
            right = next(right);
        }
        while (hull[next(top)] - hull[top]).dot(&v) > 0.0 {
            top = next(top);
        }
        while (hull[next(left)] - hull[left]).dot(&u) < 0.0 {
            left = next(left);
        }
        let (u_min, u_max) = (hull[left].dot(&u), hull[right].dot(&u));
        let (v_min, v_max) = (hull[i].dot(&v), hull[top].dot(&v));
        let area = (u_max - u_min) * (v_max - v_min);
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let center = u * (0.5 * (u_min + u_max)) + v * (0.5 * (v_min + v_max));
            best = Some((
                area,
                Rect2 {
                    center,
                    half_extents: Vec2::new(0.5 * (u_max - u_min), 0.5 * (v_max - v_min)),
                    yaw: u.y.atan2(u.x),
                },
            ));
        }
    }
    let (_, mut rect) = best.expect("hull has edges");

    if rect.half_extents.x < rect.half_extents.y {
        rect.half_extents = Vec2::new(rect.half_extents.y, rect.half_extents.x);
        rect.yaw += FRAC_PI_2;
    }
    let square = (rect.half_extents.x - rect.half_extents.y).abs() <= 1e-9 * rect.half_extents.x;
    rect.yaw = if square {
        normalize_quarter_turn(rect.yaw)
    } else {
        normalize_half_turn(rect.yaw)
    };
    Ok(rect)
}

/// Unsigned polygon area by the shoelace formula.
pub fn polygon_area(polygon: &[Vec2]) -> Result<f64, GeometryError> {
    if polygon.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            need: 3,
            got: polygon.len(),
        });
    }
    if !polygon.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    for (i, p) in polygon.iter().enumerate() {
        if polygon[..i].contains(p) {
            return Err(GeometryError::RepeatedVertex(i));
        }
    }
    let twice: f64 = polygon
        .iter()
        .zip(polygon.iter().cycle().skip(1))
        .map(|(a, b)| a.x * b.y - b.x * a.y)
        .sum();
    Ok(0.5 * twice.abs())
}

/// Even-odd test; points on the boundary count as inside.
pub fn point_in_polygon(p: &Vec2, polygon: &[Vec2]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        let ab = b - a;
        let ap = p - a;
        let along = ap.dot(&ab);
        if (ab.x * ap.y - ab.y * ap.x).abs() <= 1e-12 * ab.norm().max(1.0)
            && along >= 0.0
            && along <= ab.norm_squared()
        {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
