//! Procedural single-room scenes for tests, benchmarks and demos.
//!
//! Objects are gravity-aligned boxes (some L-shaped unions of two boxes)
//! placed without overlap inside a rectangular or L-shaped room. A share of
//! objects carries surface samples instead of an explicit box, and most
//! carry a facing direction.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classes::OBJECT_CLASSES;
use crate::geometry::{obb_distance, point_in_polygon, OrientedBox, Vec2, Vec3};
use crate::ingestion::{BuildingSpec, FloorSpec, ObjectSpec, RoomSpec, SceneFile};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Classes with exactly one instance.
    pub unique_classes: (usize, usize),
    /// Classes with several instances, and how many instances each.
    pub multi_classes: (usize, usize),
    pub instances: (usize, usize),
    pub sampled_fraction: f64,
    pub facing_fraction: f64,
    pub l_shaped_room_fraction: f64,
    /// Minimum surface gap between placed objects.
    pub clearance_m: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            unique_classes: (8, 12),
            multi_classes: (2, 4),
            instances: (2, 5),
            sampled_fraction: 0.4,
            facing_fraction: 0.85,
            l_shaped_room_fraction: 0.3,
            clearance_m: 0.15,
        }
    }
}

fn room_outline(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<Vec2> {
    let w = rng.gen_range(5.0..10.0);
    let d = rng.gen_range(5.0..9.0);
    if rng.gen_bool(cfg.l_shaped_room_fraction) {
        let cw = w * rng.gen_range(0.3..0.5);
        let cd = d * rng.gen_range(0.3..0.5);
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(w, 0.0),
            Vec2::new(w, d - cd),
            Vec2::new(w - cw, d - cd),
            Vec2::new(w - cw, d),
            Vec2::new(0.0, d),
        ]
    } else {
        vec![Vec2::new(0.0, 0.0), Vec2::new(w, 0.0), Vec2::new(w, d), Vec2::new(0.0, d)]
    }
}

fn random_box(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.gen_range(0.15..1.0),
        rng.gen_range(0.15..0.6),
        rng.gen_range(0.15..1.0),
    )
}

/// Points on the surface of a box: its corners plus uniform face samples.
fn box_surface_samples(rng: &mut ChaCha8Rng, b: &OrientedBox, extra: usize) -> Vec<Vec3> {
    let mut pts = b.corners().to_vec();
    let h = b.half_extents;
    for _ in 0..extra {
        let axis = rng.gen_range(0..3);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut l = Vec3::new(
            rng.gen_range(-h.x..=h.x),
            rng.gen_range(-h.y..=h.y),
            rng.gen_range(-h.z..=h.z),
        );
        l[axis] = sign * h[axis];
        pts.push(b.from_local(&l));
    }
    pts
}

/// One placed object before serialization.
struct Placed {
    class: &'static str,
    bound: OrientedBox,
    parts: Vec<OrientedBox>,
}

fn footprint_inside(b: &OrientedBox, outline: &[Vec2]) -> bool {
    b.corners().iter().all(|c| point_in_polygon(&c.xy(), outline))
}

fn try_place(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    class: &'static str,
    outline: &[Vec2],
    placed: &[Placed],
    l_shaped: bool,
) -> Option<Placed> {
    let (x_max, y_max) = outline
        .iter()
        .fold((0.0f64, 0.0f64), |(x, y), p| (x.max(p.x), y.max(p.y)));
    for _ in 0..200 {
        let h = random_box(rng);
        let elevated = rng.gen_bool(0.15);
        let z0 = if elevated { rng.gen_range(0.3..1.2) } else { 0.0 };
        let center = Vec3::new(rng.gen_range(0.0..x_max), rng.gen_range(0.0..y_max), z0 + h.z);
        let yaw = rng.gen_range(-PI..PI);
        let bound = OrientedBox::new(center, h, yaw);
        if !footprint_inside(&bound, outline) {
            continue;
        }
        if placed
            .iter()
            .any(|p| obb_distance(&p.bound, &bound) < cfg.clearance_m)
        {
            continue;
        }
        let parts = if l_shaped {
            // Two slabs along the box's own x and y edges form an L.
            let t = Vec3::new(h.x * 0.35, h.y * 0.35, h.z);
            let a = OrientedBox::new(
                bound.from_local(&Vec3::new(0.0, -h.y + t.y, 0.0)),
                Vec3::new(h.x, t.y, h.z),
                yaw,
            );
            let b = OrientedBox::new(
                bound.from_local(&Vec3::new(-h.x + t.x, 0.0, 0.0)),
                Vec3::new(t.x, h.y, h.z),
                yaw,
            );
            vec![a, b]
        } else {
            vec![bound]
        };
        return Some(Placed { class, bound, parts });
    }
    None
}

pub fn synth_scene(seed: u64, cfg: &SynthConfig) -> SceneFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outline = room_outline(&mut rng, cfg);

    let mut pool: Vec<&'static str> = OBJECT_CLASSES.to_vec();
    pool.shuffle(&mut rng);
    let n_unique = rng.gen_range(cfg.unique_classes.0..=cfg.unique_classes.1);
    let n_multi = rng.gen_range(cfg.multi_classes.0..=cfg.multi_classes.1);
    let mut wanted: Vec<&'static str> = pool[..n_unique].to_vec();
    for &class in &pool[n_unique..n_unique + n_multi] {
        let k = rng.gen_range(cfg.instances.0..=cfg.instances.1);
        wanted.extend(std::iter::repeat_n(class, k));
    }

    let mut placed: Vec<Placed> = Vec::new();
    for class in wanted {
        let l_shaped = rng.gen_bool(0.1);
        if let Some(p) = try_place(&mut rng, cfg, class, &outline, &placed, l_shaped) {
            placed.push(p);
        }
    }

    let mut objects = Vec::with_capacity(placed.len());
    for p in &placed {
        let sampled = p.parts.len() > 1 || rng.gen_bool(cfg.sampled_fraction);
        let facing = if rng.gen_bool(cfg.facing_fraction) {
            let (ex, ey) = p.bound.axes();
            let choice = [ex, -ex, ey, -ey][rng.gen_range(0..4)];
            Some(choice)
        } else {
            None
        };
        let (samples, obb) = if sampled {
            let mut s = Vec::new();
            for part in &p.parts {
                s.extend(box_surface_samples(&mut rng, part, 24));
            }
            (Some(s), None)
        } else {
            (None, Some(p.bound))
        };
        objects.push(ObjectSpec {
            id: None,
            class_label: p.class.to_string(),
            room: None,
            samples,
            obb,
            centroid: None,
            facing,
            volume: None,
            surface_area: None,
        });
    }

    SceneFile {
        schema_version: "1.0".into(),
        building: BuildingSpec {
            id: None,
            class_label: "residential".into(),
        },
        floors: vec![FloorSpec {
            id: None,
            level_index: 0,
            aabb: None,
        }],
        rooms: vec![RoomSpec {
            id: None,
            name: None,
            floor: None,
            footprint: Some(outline),
            aabb: None,
            height: Some(3.0),
        }],
        objects,
        near_threshold_m: None,
    }
}
