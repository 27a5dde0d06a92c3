//! Hierarchical metric scene graph: one building, its floors, their rooms,
//! and the objects inside each room, plus symmetric `near` edges between
//! objects.
//!
//! The graph is immutable once built. Every listing is ordered
//! lexicographically by [`NodeId`].

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes;
use crate::geometry::{
    polygon_area, AxisAlignedBox, ObjectGeometry, OrientedBox, Vec2, Vec3, LINEAR_TOL, RELATIVE_TOL,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Building,
    Floor,
    Room,
    Object,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Building => "building",
            Layer::Floor => "floor",
            Layer::Room => "room",
            Layer::Object => "object",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildingNode {
    pub id: NodeId,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorNode {
    pub id: NodeId,
    pub level_index: i64,
    pub aabb: AxisAlignedBox,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomNode {
    pub id: NodeId,
    pub name: String,
    pub aabb: AxisAlignedBox,
    /// Counter-clockwise plan-view outline, if known.
    pub footprint: Option<Vec<Vec2>>,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectNode {
    pub id: NodeId,
    pub class_label: String,
    pub centroid: Vec3,
    pub obb: OrientedBox,
    pub volume_m3: f64,
    pub surface_area_m2: f64,
    /// Horizontal unit heading of the object's front, if annotated.
    pub facing: Option<Vec3>,
    pub samples: Option<Vec<Vec3>>,
}

impl ObjectNode {
    pub fn geometry(&self) -> ObjectGeometry<'_> {
        ObjectGeometry {
            centroid: self.centroid,
            obb: Some(&self.obb),
            samples: self.samples.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Hierarchy,
    Near,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn hierarchy(parent: &NodeId, child: &NodeId) -> Self {
        Self {
            source: parent.clone(),
            target: child.clone(),
            kind: EdgeKind::Hierarchy,
        }
    }

    pub fn near(a: &NodeId, b: &NodeId) -> Self {
        Self {
            source: a.clone(),
            target: b.clone(),
            kind: EdgeKind::Near,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeRef<'a> {
    Building(&'a BuildingNode),
    Floor(&'a FloorNode),
    Room(&'a RoomNode),
    Object(&'a ObjectNode),
}

impl<'a> NodeRef<'a> {
    pub fn id(&self) -> &'a NodeId {
        match self {
            NodeRef::Building(n) => &n.id,
            NodeRef::Floor(n) => &n.id,
            NodeRef::Room(n) => &n.id,
            NodeRef::Object(n) => &n.id,
        }
    }

    pub fn layer(&self) -> Layer {
        match self {
            NodeRef::Building(_) => Layer::Building,
            NodeRef::Floor(_) => Layer::Floor,
            NodeRef::Room(_) => Layer::Room,
            NodeRef::Object(_) => Layer::Object,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node '{0}' not found")]
    NodeNotFound(String),
    #[error("node '{id}' is a {found} node, expected {expected}")]
    WrongLayer { id: String, expected: Layer, found: Layer },
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    NonPositiveHalfExtent,
    CentroidOutsideBox,
    FacingNotUnit,
    FacingNotHorizontal,
    VolumeExceedsBox,
    NegativeMeasure,
    NonFiniteValue,
    UnknownClass,
    RoomAreaMismatch,
    RoomFootprintInvalid,
    RoomMissesObject,
    FloorMissesRoom,
    MalformedBox,
    DanglingEdge,
    ParentCount,
    HierarchyLayer,
    NearEdgeNotObject,
    NearEdgeAsymmetric,
    SelfEdge,
    GravityAxis,
}

/// One failed invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
struct GraphIndex {
    parent: BTreeMap<NodeId, Vec<NodeId>>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    near: BTreeMap<NodeId, Vec<NodeId>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SceneGraph {
    building: BuildingNode,
    floors: BTreeMap<NodeId, FloorNode>,
    rooms: BTreeMap<NodeId, RoomNode>,
    objects: BTreeMap<NodeId, ObjectNode>,
    edges: Vec<Edge>,
    gravity_axis: Vec3,
    #[serde(skip)]
    index: GraphIndex,
}

impl SceneGraph {
    /// Assembles a graph from its parts. Only identifier uniqueness is
    /// enforced here; call [`SceneGraph::validate`] for the full invariants.
    pub fn from_parts(
        building: BuildingNode,
        floors: Vec<FloorNode>,
        rooms: Vec<RoomNode>,
        objects: Vec<ObjectNode>,
        mut edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        seen.insert(building.id.clone());
        let mut check = |id: &NodeId| {
            if seen.insert(id.clone()) {
                Ok(())
            } else {
                Err(GraphError::DuplicateId(id.to_string()))
            }
        };
        for f in &floors {
            check(&f.id)?;
        }
        for r in &rooms {
            check(&r.id)?;
        }
        for o in &objects {
            check(&o.id)?;
        }
        edges.sort();
        edges.dedup();

        let mut index = GraphIndex::default();
        for e in &edges {
            match e.kind {
                EdgeKind::Hierarchy => {
                    index.children.entry(e.source.clone()).or_default().push(e.target.clone());
                    index.parent.entry(e.target.clone()).or_default().push(e.source.clone());
                }
                EdgeKind::Near => {
                    index.near.entry(e.source.clone()).or_default().push(e.target.clone());
                }
            }
        }
        Ok(Self {
            building,
            floors: floors.into_iter().map(|f| (f.id.clone(), f)).collect(),
            rooms: rooms.into_iter().map(|r| (r.id.clone(), r)).collect(),
            objects: objects.into_iter().map(|o| (o.id.clone(), o)).collect(),
            edges,
            gravity_axis: Vec3::z(),
            index,
        })
    }

    pub fn building(&self) -> &BuildingNode {
        &self.building
    }

    pub fn floors(&self) -> impl Iterator<Item = &FloorNode> {
        self.floors.values()
    }

    pub fn rooms(&self) -> impl Iterator<Item = &RoomNode> {
        self.rooms.values()
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectNode> {
        self.objects.values()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn gravity_axis(&self) -> Vec3 {
        self.gravity_axis
    }

    pub fn node_count(&self) -> usize {
        1 + self.floors.len() + self.rooms.len() + self.objects.len()
    }

    pub fn get_node(&self, id: &str) -> Result<NodeRef<'_>, GraphError> {
        if self.building.id.as_str() == id {
            return Ok(NodeRef::Building(&self.building));
        }
        if let Some(n) = self.floors.get(id) {
            return Ok(NodeRef::Floor(n));
        }
        if let Some(n) = self.rooms.get(id) {
            return Ok(NodeRef::Room(n));
        }
        if let Some(n) = self.objects.get(id) {
            return Ok(NodeRef::Object(n));
        }
        Err(GraphError::NodeNotFound(id.to_string()))
    }

    fn expect_layer(&self, id: &str, expected: Layer) -> Result<NodeRef<'_>, GraphError> {
        let node = self.get_node(id)?;
        if node.layer() != expected {
            return Err(GraphError::WrongLayer {
                id: id.to_string(),
                expected,
                found: node.layer(),
            });
        }
        Ok(node)
    }

    pub fn object(&self, id: &str) -> Result<&ObjectNode, GraphError> {
        match self.expect_layer(id, Layer::Object)? {
            NodeRef::Object(o) => Ok(o),
            _ => unreachable!("layer checked"),
        }
    }

    pub fn room(&self, id: &str) -> Result<&RoomNode, GraphError> {
        match self.expect_layer(id, Layer::Room)? {
            NodeRef::Room(r) => Ok(r),
            _ => unreachable!("layer checked"),
        }
    }

    /// Hierarchy children in id order.
    pub fn children(&self, id: &str) -> Result<Vec<NodeId>, GraphError> {
        self.get_node(id)?;
        Ok(self.index.children.get(id).cloned().unwrap_or_default())
    }

    pub fn parent(&self, id: &str) -> Result<Option<&NodeId>, GraphError> {
        self.get_node(id)?;
        Ok(self.index.parent.get(id).and_then(|p| p.first()))
    }

    /// Every object in the hierarchy subtree rooted at `id`, in id order.
    pub fn subtree_objects(&self, id: &str) -> Result<Vec<NodeId>, GraphError> {
        let root = self.get_node(id)?;
        if let NodeRef::Object(o) = root {
            return Ok(vec![o.id.clone()]);
        }
        let mut out = Vec::new();
        let mut stack = vec![root.id().clone()];
        while let Some(n) = stack.pop() {
            for c in self.index.children.get(&n).into_iter().flatten() {
                if self.objects.contains_key(c) {
                    out.push(c.clone());
                } else {
                    stack.push(c.clone());
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Objects of `class_label`, optionally restricted to the subtree of
    /// `room`.
    pub fn objects_by_class(&self, class_label: &str, room: Option<&str>) -> Result<Vec<NodeId>, GraphError> {
        let scope: Option<BTreeSet<NodeId>> = match room {
            Some(r) => Some(self.subtree_objects(r)?.into_iter().collect()),
            None => None,
        };
        Ok(self
            .objects
            .values()
            .filter(|o| o.class_label == class_label)
            .filter(|o| scope.as_ref().is_none_or(|s| s.contains(&o.id)))
            .map(|o| o.id.clone())
            .collect())
    }

    pub fn near_neighbors(&self, id: &str) -> Result<Vec<NodeId>, GraphError> {
        self.object(id)?;
        Ok(self.index.near.get(id).cloned().unwrap_or_default())
    }

    /// Distinct object classes present in the scene.
    pub fn class_set(&self) -> BTreeSet<&str> {
        self.objects.values().map(|o| o.class_label.as_str()).collect()
    }

    /// Nearest ancestor room of an object.
    pub fn room_of(&self, object: &str) -> Result<Option<&RoomNode>, GraphError> {
        self.object(object)?;
        Ok(self
            .index
            .parent
            .get(object)
            .and_then(|ps| ps.iter().find_map(|p| self.rooms.get(p))))
    }

    /// Canonical serialization; equal graphs give equal bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scene graph serializes")
    }

    /// Checks every structural and metric invariant. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut flag = |node: &NodeId, rule: Rule, detail: String| {
            out.push(Violation {
                node: node.clone(),
                rule,
                detail,
            })
        };

        if (self.gravity_axis - Vec3::z()).norm() > LINEAR_TOL {
            flag(&self.building.id, Rule::GravityAxis, "gravity axis must be +z".into());
        }

        for f in self.floors.values() {
            if !f.aabb.is_well_formed() {
                flag(&f.id, Rule::MalformedBox, "floor box is malformed".into());
            }
            if !(f.area_m2 >= 0.0) || !f.area_m2.is_finite() {
                flag(&f.id, Rule::NegativeMeasure, format!("area {}", f.area_m2));
            }
            for c in self.index.children.get(&f.id).into_iter().flatten() {
                if let Some(r) = self.rooms.get(c) {
                    if !f.aabb.contains_box(&r.aabb, LINEAR_TOL) {
                        flag(&f.id, Rule::FloorMissesRoom, format!("room {} extends past the floor box", r.id));
                    }
                }
            }
        }

        for r in self.rooms.values() {
            if !r.aabb.is_well_formed() {
                flag(&r.id, Rule::MalformedBox, "room box is malformed".into());
            }
            if !(r.area_m2 >= 0.0) || !r.area_m2.is_finite() {
                flag(&r.id, Rule::NegativeMeasure, format!("area {}", r.area_m2));
            }
            let expected = match &r.footprint {
                Some(poly) => match polygon_area(poly) {
                    Ok(a) => Some(a),
                    Err(e) => {
                        flag(&r.id, Rule::RoomFootprintInvalid, e.to_string());
                        None
                    }
                },
                None => Some(r.aabb.footprint_area()),
            };
            if let Some(a) = expected {
                if (r.area_m2 - a).abs() > RELATIVE_TOL * a.max(1e-12) {
                    flag(&r.id, Rule::RoomAreaMismatch, format!("stored {} but geometry gives {}", r.area_m2, a));
                }
            }
            for c in self.index.children.get(&r.id).into_iter().flatten() {
                if let Some(o) = self.objects.get(c) {
                    if !r.aabb.contains_point(&o.centroid, LINEAR_TOL) {
                        flag(&r.id, Rule::RoomMissesObject, format!("object {} centroid lies outside the room box", o.id));
                    }
                }
            }
        }

        for o in self.objects.values() {
            let finite = o.centroid.iter().all(|c| c.is_finite())
                && o.obb.center.iter().all(|c| c.is_finite())
                && o.obb.half_extents.iter().all(|c| c.is_finite())
                && o.obb.yaw.is_finite()
                && o.volume_m3.is_finite()
                && o.surface_area_m2.is_finite();
            if !finite {
                flag(&o.id, Rule::NonFiniteValue, "non-finite attribute".into());
                continue;
            }
            if !classes::is_known_class(&o.class_label) {
                flag(&o.id, Rule::UnknownClass, format!("class '{}' is not in the vocabulary", o.class_label));
            }
            if o.obb.half_extents.iter().any(|&h| h <= 0.0) {
                flag(&o.id, Rule::NonPositiveHalfExtent, format!("half extents {:?}", o.obb.half_extents.as_slice()));
            } else if !o.obb.inflated(1.1).contains(&o.centroid, LINEAR_TOL) {
                flag(&o.id, Rule::CentroidOutsideBox, "centroid lies outside the box inflated by 10%".into());
            }
            if o.volume_m3 < 0.0 || o.surface_area_m2 < 0.0 {
                flag(&o.id, Rule::NegativeMeasure, "negative volume or surface area".into());
            }
            let box_volume = o.obb.volume();
            if o.volume_m3 > box_volume * (1.0 + RELATIVE_TOL) {
                flag(&o.id, Rule::VolumeExceedsBox, format!("volume {} exceeds box volume {}", o.volume_m3, box_volume));
            }
            if let Some(f) = &o.facing {
                if (f.norm() - 1.0).abs() > LINEAR_TOL {
                    flag(&o.id, Rule::FacingNotUnit, format!("|facing| = {}", f.norm()));
                }
                if f.dot(&self.gravity_axis).abs() > RELATIVE_TOL {
                    flag(&o.id, Rule::FacingNotHorizontal, "facing has a vertical component".into());
                }
            }
        }

        // Hierarchy: building -> floor -> room -> object, one parent each.
        let layer_of = |id: &NodeId| self.get_node(id.as_str()).ok().map(|n| n.layer());
        for e in &self.edges {
            let (src, dst) = (layer_of(&e.source), layer_of(&e.target));
            if src.is_none() || dst.is_none() {
                let missing = if src.is_none() { &e.source } else { &e.target };
                flag(missing, Rule::DanglingEdge, format!("edge {} -> {} references a missing node", e.source, e.target));
                continue;
            }
            if e.source == e.target {
                flag(&e.source, Rule::SelfEdge, "self edge".into());
                continue;
            }
            match e.kind {
                EdgeKind::Hierarchy => {
                    let ok = matches!(
                        (src, dst),
                        (Some(Layer::Building), Some(Layer::Floor))
                            | (Some(Layer::Floor), Some(Layer::Room))
                            | (Some(Layer::Room), Some(Layer::Object))
                    );
                    if !ok {
                        flag(&e.target, Rule::HierarchyLayer, format!("hierarchy edge {} -> {} skips or inverts a layer", e.source, e.target));
                    }
                }
                EdgeKind::Near => {
                    if src != Some(Layer::Object) || dst != Some(Layer::Object) {
                        flag(&e.source, Rule::NearEdgeNotObject, format!("near edge {} -> {} joins non-objects", e.source, e.target));
                    } else if !self.index.near.get(&e.target).is_some_and(|v| v.contains(&e.source)) {
                        flag(&e.source, Rule::NearEdgeAsymmetric, format!("near edge {} -> {} has no reverse", e.source, e.target));
                    }
                }
            }
        }
        let non_root = self
            .floors
            .keys()
            .chain(self.rooms.keys())
            .chain(self.objects.keys());
        for id in non_root {
            let n = self.index.parent.get(id).map_or(0, |p| p.len());
            if n != 1 {
                flag(id, Rule::ParentCount, format!("{n} hierarchy parents"));
            }
        }
        if self.index.parent.contains_key(&self.building.id) {
            flag(&self.building.id, Rule::ParentCount, "building has a parent".into());
        }
        out
    }
}
