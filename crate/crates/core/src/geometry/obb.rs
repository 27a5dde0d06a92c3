use serde::{Deserialize, Serialize};

use super::{check_non_coplanar, min_area_rect_2d, GeometryError, Rect2, Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAlignedBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl AxisAlignedBox {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        Some(it.fold(Self::new(first, first), |b, p| Self::new(b.min.inf(p), b.max.sup(p))))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.min.inf(&other.min), self.max.sup(&other.max))
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    /// Plan-view area (x extent times y extent).
    pub fn footprint_area(&self) -> f64 {
        let e = self.extents();
        e.x.max(0.0) * e.y.max(0.0)
    }

    pub fn contains_point(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    pub fn contains_box(&self, other: &Self, tol: f64) -> bool {
        self.contains_point(&other.min, tol) && self.contains_point(&other.max, tol)
    }

    pub fn is_well_formed(&self) -> bool {
        (0..3).all(|i| self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] <= self.max[i])
    }
}

/// Gravity-aligned box: a rectangle in plan view rotated by `yaw` about +z,
/// extruded vertically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub yaw: f64,
}

impl OrientedBox {
    pub fn new(center: Vec3, half_extents: Vec3, yaw: f64) -> Self {
        Self {
            center,
            half_extents,
            yaw,
        }
    }

    /// Horizontal unit axes along which `half_extents.x` and `.y` are measured.
    pub fn axes(&self) -> (Vec3, Vec3) {
        let (s, c) = self.yaw.sin_cos();
        (Vec3::new(c, s, 0.0), Vec3::new(-s, c, 0.0))
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let (ex, ey) = self.axes();
        let d = p - self.center;
        Vec3::new(d.dot(&ex), d.dot(&ey), d.z)
    }

    pub fn from_local(&self, l: &Vec3) -> Vec3 {
        let (ex, ey) = self.axes();
        self.center + ex * l.x + ey * l.y + Vec3::z() * l.z
    }

    pub fn volume(&self) -> f64 {
        let h = self.half_extents;
        8.0 * h.x * h.y * h.z
    }

    pub fn surface_area(&self) -> f64 {
        let h = self.half_extents;
        8.0 * (h.x * h.y + h.y * h.z + h.x * h.z)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.from_local(&Vec3::new(sx * h.x, sy * h.y, sz * h.z));
        }
        out
    }

    /// Plan-view rectangle.
    pub fn footprint(&self) -> Rect2 {
        Rect2 {
            center: self.center.xy(),
            half_extents: self.half_extents.xy(),
            yaw: self.yaw,
        }
    }

    /// Vertical interval `[bottom, top]`.
    pub fn z_range(&self) -> (f64, f64) {
        (
            self.center.z - self.half_extents.z,
            self.center.z + self.half_extents.z,
        )
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let l = self.to_local(p);
        (0..3).all(|i| l[i].abs() <= self.half_extents[i] + tol)
    }

    /// Same box with every half-extent scaled by `factor`.
    pub fn inflated(&self, factor: f64) -> Self {
        Self::new(self.center, self.half_extents * factor, self.yaw)
    }

    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        let l = self.to_local(p);
        let h = self.half_extents;
        self.from_local(&Vec3::new(
            l.x.clamp(-h.x, h.x),
            l.y.clamp(-h.y, h.y),
            l.z.clamp(-h.z, h.z),
        ))
    }

    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        let l = self.to_local(p);
        let h = self.half_extents;
        Vec3::new(
            (l.x.abs() - h.x).max(0.0),
            (l.y.abs() - h.y).max(0.0),
            (l.z.abs() - h.z).max(0.0),
        )
        .norm()
    }

    pub fn aabb(&self) -> AxisAlignedBox {
        AxisAlignedBox::from_points(self.corners().iter()).expect("eight corners")
    }
}

/// Fits a gravity-aligned box to samples: plan-view minimum-area rectangle
/// plus the vertical sample range.
pub fn obb_fit(samples: &[Vec3]) -> Result<OrientedBox, GeometryError> {
    check_non_coplanar(samples)?;
    let plan: Vec<Vec2> = samples.iter().map(|p| p.xy()).collect();
    let rect = min_area_rect_2d(&plan)?;
    let (z_lo, z_hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.z), hi.max(p.z))
        });
    Ok(OrientedBox::new(
        Vec3::new(rect.center.x, rect.center.y, 0.5 * (z_lo + z_hi)),
        Vec3::new(rect.half_extents.x, rect.half_extents.y, 0.5 * (z_hi - z_lo)),
        rect.yaw,
    ))
}
