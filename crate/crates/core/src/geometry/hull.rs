//! Quickhull in three dimensions.
//!
//! Faces are triangles with outward normals. Points within `eps` of a face
//! plane are treated as lying on it, so the hull may triangulate coplanar
//! facets arbitrarily but always contains every input within `eps`.

use std::collections::HashMap;

use serde::Serialize;

use super::{all_finite3, extent_scale, GeometryError, Vec3};

/// Relative tolerance used to reject collinear/coplanar inputs.
const DEGENERACY_TOL: f64 = 1e-9;
/// Relative tolerance for the outside test during construction.
const PLANE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ConvexHull {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let normal = if len > 0.0 { n / len } else { n };
        let offset = (normal.dot(&a) + normal.dot(&b) + normal.dot(&c)) / 3.0;
        Self {
            v,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

/// Finds four affinely independent points, or reports why none exist.
fn initial_simplex(points: &[Vec3]) -> Result<[usize; 4], GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::TooFewPoints {
            need: 4,
            got: points.len(),
        });
    }
    if !all_finite3(points) {
        return Err(GeometryError::NonFinite);
    }
    let tol = extent_scale(points) * DEGENERACY_TOL;

    // Extreme pair along the axis of largest spread.
    let mut best = (0, 0, -1.0);
    for axis in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[axis] < points[lo][axis] {
                lo = i;
            }
            if p[axis] > points[hi][axis] {
                hi = i;
            }
        }
        let spread = points[hi][axis] - points[lo][axis];
        if spread > best.2 {
            best = (lo, hi, spread);
        }
    }
    let (i0, i1, spread) = best;
    if spread <= tol {
        return Err(GeometryError::Coincident);
    }

    let dir = (points[i1] - points[i0]).normalize();
    let (i2, d2) = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let v = p - points[i0];
            (i, (v - dir * v.dot(&dir)).norm())
        })
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if d2 <= tol {
        return Err(GeometryError::Collinear);
    }

    let normal = (points[i1] - points[i0])
        .cross(&(points[i2] - points[i0]))
        .normalize();
    let (i3, d3) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, normal.dot(&(p - points[i0])).abs()))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if d3 <= tol {
        return Err(GeometryError::Coplanar);
    }
    Ok([i0, i1, i2, i3])
}

/// Checks that `points` holds at least four finite, non-coplanar points.
pub fn check_non_coplanar(points: &[Vec3]) -> Result<(), GeometryError> {
    initial_simplex(points).map(|_| ())
}

/// Computes the convex hull of at least four non-coplanar points.
pub fn convex_hull_3d(points: &[Vec3]) -> Result<ConvexHull, GeometryError> {
    let [i0, i1, i2, i3] = initial_simplex(points)?;
    let eps = extent_scale(points) * PLANE_TOL;

    let mut faces: Vec<Face> = Vec::new();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();

    let base = Face::new(points, [i0, i1, i2]);
    let base_v = if base.distance(&points[i3]) > 0.0 {
        [i0, i2, i1]
    } else {
        [i0, i1, i2]
    };
    let mut seed = vec![base_v];
    for (a, b) in [(base_v[0], base_v[1]), (base_v[1], base_v[2]), (base_v[2], base_v[0])] {
        seed.push([b, a, i3]);
    }
    for v in seed {
        let idx = faces.len();
        let face = Face::new(points, v);
        for e in face.edges() {
            edge_owner.insert(e, idx);
        }
        faces.push(face);
    }

    for (pi, p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(pi);
        }
    }

    let mut pending: Vec<usize> = (0..faces.len())
        .filter(|&i| !faces[i].outside.is_empty())
        .collect();
    let mut visit_mark: Vec<usize> = vec![usize::MAX; faces.len()];
    let mut round = 0usize;

    while let Some(fi) = pending.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        round += 1;
        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                faces[fi]
                    .distance(&points[a])
                    .total_cmp(&faces[fi].distance(&points[b]))
            })
            .expect("non-empty outside set");
        let eye_p = points[eye];

        // Flood the connected set of faces that see the eye point.
        let mut visible = Vec::new();
        let mut stack = vec![fi];
        visit_mark[fi] = round;
        while let Some(f) = stack.pop() {
            visible.push(f);
            for (a, b) in faces[f].edges() {
                let twin = *edge_owner
                    .get(&(b, a))
                    .ok_or(GeometryError::Topology("missing twin edge"))?;
                if visit_mark[twin] != round && faces[twin].distance(&eye_p) > eps {
                    visit_mark[twin] = round;
                    stack.push(twin);
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            for (a, b) in faces[f].edges() {
                let twin = edge_owner[&(b, a)];
                if visit_mark[twin] != round {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            for e in faces[f].edges() {
                edge_owner.remove(&e);
            }
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
        }

        let first_new = faces.len();
        for (a, b) in horizon {
            let idx = faces.len();
            let face = Face::new(points, [a, b, eye]);
            for e in face.edges() {
                edge_owner.insert(e, idx);
            }
            faces.push(face);
            visit_mark.push(usize::MAX);
        }

        for pi in orphans {
            if pi == eye {
                continue;
            }
            let p = &points[pi];
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.distance(p) > eps) {
                f.outside.push(pi);
            }
        }
        pending.extend((first_new..faces.len()).filter(|&i| !faces[i].outside.is_empty()));
    }

    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut out_faces = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let mut tri = [0usize; 3];
        for (slot, &v) in tri.iter_mut().zip(f.v.iter()) {
            *slot = *remap.entry(v).or_insert_with(|| {
                vertices.push(points[v]);
                vertices.len() - 1
            });
        }
        out_faces.push(tri);
    }
    Ok(ConvexHull {
        vertices,
        faces: out_faces,
    })
}

impl ConvexHull {
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    fn centroid_of_vertices(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Enclosed volume, as a signed tetrahedron sum about the vertex centroid.
    pub fn volume(&self) -> f64 {
        let r = self.centroid_of_vertices();
        let six_v: f64 = self
            .faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (
                    self.vertices[a] - r,
                    self.vertices[b] - r,
                    self.vertices[c] - r,
                );
                a.dot(&b.cross(&c))
            })
            .sum();
        (six_v / 6.0).max(0.0)
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Outward unit normals and plane offsets (`n·x = d`) of every face.
    pub fn planes(&self) -> Vec<(Vec3, f64)> {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let n = (b - a).cross(&(c - a));
                let n = if n.norm() > 0.0 { n.normalize() } else { n };
                (n, n.dot(&a))
            })
            .collect()
    }

    /// Largest signed distance from `p` to any face plane; non-positive
    /// means inside.
    pub fn max_signed_distance(&self, p: &Vec3) -> f64 {
        self.planes()
            .iter()
            .map(|(n, d)| n.dot(p) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.max_signed_distance(p) <= tol
    }
}
