//! Scene-file loading: parse the canonical JSON annotation format, derive
//! missing metric attributes, precompute `near` edges and validate.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes;
use crate::geometry::{
    convex_hull_3d, distance, obb_fit, point_in_polygon, polygon_area, AxisAlignedBox, DistanceMode, GeometryError,
    OrientedBox, Vec2, Vec3, RELATIVE_TOL,
};
use crate::scene_graph::{
    BuildingNode, Edge, FloorNode, GraphError, NodeId, ObjectNode, RoomNode, SceneGraph, Violation,
};

pub const DEFAULT_NEAR_THRESHOLD_M: f64 = 1.0;
/// Ceiling height assumed for rooms given only a footprint.
pub const DEFAULT_ROOM_HEIGHT_M: f64 = 3.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scene file: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("degenerate geometry for {object}: {source}")]
    Geometry {
        object: String,
        #[source]
        source: GeometryError,
    },
    #[error("scene fails {} invariant(s); first: {}", .0.len(), .0.first().map(|v| v.detail.as_str()).unwrap_or(""))]
    Invalid(Vec<Violation>),
}

impl From<GraphError> for IngestError {
    fn from(e: GraphError) -> Self {
        IngestError::Schema(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: String,
    pub building: BuildingSpec,
    pub floors: Vec<FloorSpec>,
    pub rooms: Vec<RoomSpec>,
    pub objects: Vec<ObjectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_threshold_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub level_index: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aabb: Option<AxisAlignedBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint: Option<Vec<Vec2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aabb: Option<AxisAlignedBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub class_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obb: Option<OrientedBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facing: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_area: Option<f64>,
}

/// Metric attributes derived from a sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedAttributes {
    pub centroid: Vec3,
    pub obb: OrientedBox,
    pub volume_m3: f64,
    pub surface_area_m2: f64,
}

pub fn derive_object_attributes(samples: &[Vec3]) -> Result<DerivedAttributes, GeometryError> {
    let hull = convex_hull_3d(samples)?;
    let obb = obb_fit(samples)?;
    let centroid = samples.iter().sum::<Vec3>() / samples.len() as f64;
    Ok(DerivedAttributes {
        centroid,
        obb,
        volume_m3: hull.volume(),
        surface_area_m2: hull.surface_area(),
    })
}

/// Symmetric `near` edges between every pair of objects whose surface
/// distance is at most `threshold_m`.
pub fn compute_near_edges(objects: &[ObjectNode], threshold_m: f64) -> Vec<Edge> {
    let mut edges = Vec::new();
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            let d = distance(&a.geometry(), &b.geometry(), DistanceMode::Surface).unwrap_or(f64::INFINITY);
            if d <= threshold_m {
                edges.push(Edge::near(&a.id, &b.id));
                edges.push(Edge::near(&b.id, &a.id));
            }
        }
    }
    edges
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneGraph, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scene_str(&text)
}

pub fn load_scene_str(text: &str) -> Result<SceneGraph, IngestError> {
    build_scene(parse_scene_file(text)?)
}

/// Parses without building. Syntax problems are `Parse`, shape problems
/// (missing keys, wrong types) are `Schema`.
pub fn parse_scene_file(text: &str) -> Result<SceneFile, IngestError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| IngestError::Parse(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| IngestError::Schema(e.to_string()))
}

fn schema(msg: impl Into<String>) -> IngestError {
    IngestError::Schema(msg.into())
}

/// Hands out `<Prefix>-<k>` ids in input order, skipping ids that are taken.
struct IdAllocator {
    taken: BTreeSet<String>,
    counters: BTreeMap<String, usize>,
}

impl IdAllocator {
    fn next(&mut self, prefix: &str) -> String {
        let k = self.counters.entry(prefix.to_string()).or_insert(0);
        loop {
            let candidate = format!("{prefix}-{k}");
            *k += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

fn finite_box(b: &AxisAlignedBox) -> bool {
    b.is_well_formed()
}

pub fn build_scene(file: SceneFile) -> Result<SceneGraph, IngestError> {
    let version = file.schema_version.trim();
    if !(version == "1" || version.starts_with("1.")) {
        return Err(schema(format!("unsupported schema_version '{version}'")));
    }
    let threshold = file.near_threshold_m.unwrap_or(DEFAULT_NEAR_THRESHOLD_M);
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(schema("near_threshold_m must be a non-negative number"));
    }

    let mut taken = BTreeSet::new();
    let explicit = std::iter::once(file.building.id.as_ref())
        .chain(file.floors.iter().map(|f| f.id.as_ref()))
        .chain(file.rooms.iter().map(|r| r.id.as_ref()))
        .chain(file.objects.iter().map(|o| o.id.as_ref()))
        .flatten();
    for id in explicit {
        if id.trim().is_empty() {
            return Err(schema("node ids must be non-empty"));
        }
        if !taken.insert(id.clone()) {
            return Err(schema(format!("duplicate node id '{id}'")));
        }
    }
    let mut ids = IdAllocator {
        taken,
        counters: BTreeMap::new(),
    };

    let building = BuildingNode {
        id: NodeId::new(file.building.id.clone().unwrap_or_else(|| ids.next("Building"))),
        class_label: file.building.class_label.clone(),
    };
    let floor_ids: Vec<NodeId> = file
        .floors
        .iter()
        .map(|f| NodeId::new(f.id.clone().unwrap_or_else(|| ids.next("Floor"))))
        .collect();
    let room_ids: Vec<NodeId> = file
        .rooms
        .iter()
        .map(|r| NodeId::new(r.id.clone().unwrap_or_else(|| ids.next("Room"))))
        .collect();

    // Objects: derive attributes, then find the containing room.
    let mut objects = Vec::with_capacity(file.objects.len());
    let mut object_room: Vec<usize> = Vec::with_capacity(file.objects.len());
    for spec in &file.objects {
        let class_label = spec.class_label.trim().to_string();
        if !classes::is_known_class(&class_label) {
            return Err(schema(format!("unknown object class '{}'", spec.class_label)));
        }
        let id = NodeId::new(
            spec.id
                .clone()
                .unwrap_or_else(|| ids.next(&classes::title_case(&class_label))),
        );
        let object = build_object(id, class_label, spec)?;
        let room = assign_room(&object, spec.room.as_deref(), &file.rooms, &room_ids)?;
        object_room.push(room);
        objects.push(object);
    }

    // Rooms: box from annotation, footprint, or children.
    let mut rooms = Vec::with_capacity(file.rooms.len());
    let mut room_floor = Vec::with_capacity(file.rooms.len());
    for (ri, spec) in file.rooms.iter().enumerate() {
        let children: Vec<&ObjectNode> = objects
            .iter()
            .zip(&object_room)
            .filter(|(_, &r)| r == ri)
            .map(|(o, _)| o)
            .collect();
        let child_box = children
            .iter()
            .map(|o| o.obb.aabb())
            .reduce(|a, b| a.union(&b));
        let aabb = match (&spec.aabb, &spec.footprint) {
            (Some(b), _) => {
                if !finite_box(b) {
                    return Err(schema(format!("room {} has a malformed aabb", room_ids[ri])));
                }
                *b
            }
            (None, Some(poly)) => {
                if poly.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                    return Err(schema(format!("room {} footprint is not finite", room_ids[ri])));
                }
                let height = spec.height.unwrap_or(DEFAULT_ROOM_HEIGHT_M);
                if !height.is_finite() || height <= 0.0 {
                    return Err(schema(format!("room {} height must be positive", room_ids[ri])));
                }
                let (mut z_lo, mut z_hi) = (0.0f64, height);
                if let Some(cb) = child_box {
                    z_lo = z_lo.min(cb.min.z);
                    z_hi = z_hi.max(cb.max.z);
                }
                let xs = poly.iter().map(|p| p.x);
                let ys = poly.iter().map(|p| p.y);
                let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
                let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), y| (l.min(y), h.max(y)));
                AxisAlignedBox::new(Vec3::new(x_lo, y_lo, z_lo), Vec3::new(x_hi, y_hi, z_hi))
            }
            (None, None) => child_box.ok_or_else(|| {
                schema(format!(
                    "room {} needs a footprint or an aabb when it has no objects",
                    room_ids[ri]
                ))
            })?,
        };
        let area_m2 = match &spec.footprint {
            Some(poly) => polygon_area(poly).map_err(|source| IngestError::Geometry {
                object: room_ids[ri].to_string(),
                source,
            })?,
            None => aabb.footprint_area(),
        };
        let floor = match &spec.floor {
            Some(f) => floor_ids
                .iter()
                .position(|id| id.as_str() == f)
                .ok_or_else(|| schema(format!("room {} references unknown floor '{f}'", room_ids[ri])))?,
            None if floor_ids.len() == 1 => 0,
            None => {
                return Err(schema(format!(
                    "room {} must name its floor when the building has {} floors",
                    room_ids[ri],
                    floor_ids.len()
                )))
            }
        };
        room_floor.push(floor);
        rooms.push(RoomNode {
            id: room_ids[ri].clone(),
            name: spec
                .name
                .clone()
                .unwrap_or_else(|| room_ids[ri].as_str().to_lowercase().replace('-', "_")),
            aabb,
            footprint: spec.footprint.clone(),
            area_m2,
        });
    }

    // Floors: annotated box or the union of their rooms; area sums rooms.
    let mut floors = Vec::with_capacity(file.floors.len());
    for (fi, spec) in file.floors.iter().enumerate() {
        let members: Vec<&RoomNode> = rooms
            .iter()
            .zip(&room_floor)
            .filter(|(_, &f)| f == fi)
            .map(|(r, _)| r)
            .collect();
        let aabb = match &spec.aabb {
            Some(b) if finite_box(b) => *b,
            Some(_) => return Err(schema(format!("floor {} has a malformed aabb", floor_ids[fi]))),
            None => members
                .iter()
                .map(|r| r.aabb)
                .reduce(|a, b| a.union(&b))
                .unwrap_or_else(|| AxisAlignedBox::new(Vec3::zeros(), Vec3::zeros())),
        };
        floors.push(FloorNode {
            id: floor_ids[fi].clone(),
            level_index: spec.level_index,
            aabb,
            area_m2: members.iter().map(|r| r.area_m2).sum(),
        });
    }

    let mut edges = Vec::new();
    for f in &floors {
        edges.push(Edge::hierarchy(&building.id, &f.id));
    }
    for (r, &fi) in rooms.iter().zip(&room_floor) {
        edges.push(Edge::hierarchy(&floors[fi].id, &r.id));
    }
    for (o, &ri) in objects.iter().zip(&object_room) {
        edges.push(Edge::hierarchy(&rooms[ri].id, &o.id));
    }
    edges.extend(compute_near_edges(&objects, threshold));

    let graph = SceneGraph::from_parts(building, floors, rooms, objects, edges)?;
    let violations = graph.validate();
    if !violations.is_empty() {
        return Err(IngestError::Invalid(violations));
    }
    Ok(graph)
}

fn build_object(id: NodeId, class_label: String, spec: &ObjectSpec) -> Result<ObjectNode, IngestError> {
    let geom_err = |source| IngestError::Geometry {
        object: id.to_string(),
        source,
    };
    let samples = match &spec.samples {
        Some(s) if s.iter().any(|p| p.iter().any(|c| !c.is_finite())) => {
            return Err(geom_err(GeometryError::NonFinite))
        }
        Some(s) => Some(s.clone()),
        None => None,
    };
    let derived = match &samples {
        Some(s) => Some(derive_object_attributes(s).map_err(geom_err)?),
        None => None,
    };
    let obb = match (&spec.obb, &derived) {
        (Some(b), _) => {
            let finite = b.center.iter().chain(b.half_extents.iter()).all(|c| c.is_finite()) && b.yaw.is_finite();
            if !finite {
                return Err(schema(format!("object {id} has a non-finite obb")));
            }
            *b
        }
        (None, Some(d)) => d.obb,
        (None, None) => return Err(schema(format!("object {id} needs samples or an obb"))),
    };
    let centroid = spec
        .centroid
        .or(derived.map(|d| d.centroid))
        .unwrap_or(obb.center);
    let volume_m3 = spec
        .volume
        .or(derived.map(|d| d.volume_m3))
        .unwrap_or_else(|| obb.volume());
    let surface_area_m2 = spec
        .surface_area
        .or(derived.map(|d| d.surface_area_m2))
        .unwrap_or_else(|| obb.surface_area());
    let facing = match spec.facing {
        None => None,
        Some(f) => {
            let n = f.norm();
            if !n.is_finite() || n <= 0.0 {
                return Err(schema(format!("object {id} has a zero facing vector")));
            }
            if (f.z / n).abs() > RELATIVE_TOL {
                return Err(schema(format!("object {id} facing must be horizontal")));
            }
            Some(Vec3::new(f.x, f.y, 0.0).normalize())
        }
    };
    Ok(ObjectNode {
        id,
        class_label,
        centroid,
        obb,
        volume_m3,
        surface_area_m2,
        facing,
        samples,
    })
}

/// Explicit room reference, else the unique room whose plan contains the
/// centroid, else the only room.
fn assign_room(
    object: &ObjectNode,
    explicit: Option<&str>,
    specs: &[RoomSpec],
    ids: &[NodeId],
) -> Result<usize, IngestError> {
    if let Some(r) = explicit {
        return ids
            .iter()
            .position(|id| id.as_str() == r)
            .ok_or_else(|| schema(format!("object {} references unknown room '{r}'", object.id)));
    }
    if specs.len() == 1 {
        return Ok(0);
    }
    let c = object.centroid;
    let containing: Vec<usize> = specs
        .iter()
        .enumerate()
        .filter(|(_, s)| match (&s.footprint, &s.aabb) {
            (Some(poly), _) => point_in_polygon(&c.xy(), poly),
            (None, Some(b)) => b.contains_point(&c, 0.0),
            (None, None) => false,
        })
        .map(|(i, _)| i)
        .collect();
    match containing.as_slice() {
        [i] => Ok(*i),
        [] => Err(schema(format!("object {} lies in no room; name its room", object.id))),
        _ => Err(schema(format!("object {} lies in several rooms; name its room", object.id))),
    }
}
