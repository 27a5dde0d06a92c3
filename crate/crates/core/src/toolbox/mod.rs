//! The four tool namespaces (`mem_`, `sg_`, `geom_`, `loc_`) as typed,
//! deterministic operations over one loaded scene.
//!
//! Tool results are JSON values whose floats are rounded to nine
//! significant digits and whose object keys are sorted, so equal calls
//! serialize to equal bytes.

mod catalog;
mod context;
mod resolve;

pub use catalog::{catalog, find_tool, ParamSpec, ParamType, ToolDescriptor, CATALOG, NAMESPACES};
pub use context::{expand_id_range, format_id_range, scene_context, ClassSummary, ContextRow, SceneContext, Totals};
pub use resolve::{resolve_class, similarity, ClassCandidate, ClassResolution, ACCEPT_THRESHOLD};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::classes::{normalize_term, synonym_of};
use crate::geometry::{
    build_egocentric_frame, classify_direction, distance, Difficulty, DistanceMode, Frame, GeometryError, Vec3,
};
use crate::scene_graph::{GraphError, NodeId, NodeRef, ObjectNode, SceneGraph};

/// Closed set of error codes shared by the toolbox and the wire protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    NodeNotFound,
    WrongLayer,
    MissingGeometry,
    MissingOrientation,
    DegenerateFrame,
    DegenerateDirection,
    UnknownFrame,
    UnknownTool,
    BadArguments,
    NoSceneLoaded,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 10] = [
        ErrorCode::NodeNotFound,
        ErrorCode::WrongLayer,
        ErrorCode::MissingGeometry,
        ErrorCode::MissingOrientation,
        ErrorCode::DegenerateFrame,
        ErrorCode::DegenerateDirection,
        ErrorCode::UnknownFrame,
        ErrorCode::UnknownTool,
        ErrorCode::BadArguments,
        ErrorCode::NoSceneLoaded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::NodeNotFound => "NodeNotFound",
            ErrorCode::WrongLayer => "WrongLayer",
            ErrorCode::MissingGeometry => "MissingGeometry",
            ErrorCode::MissingOrientation => "MissingOrientation",
            ErrorCode::DegenerateFrame => "DegenerateFrame",
            ErrorCode::DegenerateDirection => "DegenerateDirection",
            ErrorCode::UnknownFrame => "UnknownFrame",
            ErrorCode::UnknownTool => "UnknownTool",
            ErrorCode::BadArguments => "BadArguments",
            ErrorCode::NoSceneLoaded => "NoSceneLoaded",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{code}: {message}")]
pub struct ToolError {
    pub code: ErrorCode,
    pub message: String,
}

impl ToolError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn bad_args(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadArguments, message)
    }
}

impl From<GraphError> for ToolError {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::NodeNotFound(_) => ErrorCode::NodeNotFound,
            GraphError::WrongLayer { .. } => ErrorCode::WrongLayer,
            GraphError::DuplicateId(_) => ErrorCode::BadArguments,
        };
        Self::new(code, e.to_string())
    }
}

impl From<GeometryError> for ToolError {
    fn from(e: GeometryError) -> Self {
        let code = match e {
            GeometryError::DegenerateFrame => ErrorCode::DegenerateFrame,
            GeometryError::DegenerateDirection => ErrorCode::DegenerateDirection,
            _ => ErrorCode::MissingGeometry,
        };
        Self::new(code, e.to_string())
    }
}

/// Rounds to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Rounds every float in `v`, in place.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn vec3(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

/// Validated view of a call's arguments.
struct Args<'a> {
    tool: &'static ToolDescriptor,
    map: Option<&'a Map<String, Value>>,
}

impl<'a> Args<'a> {
    fn parse(tool: &'static ToolDescriptor, raw: &'a Value) -> Result<Self, ToolError> {
        let map = match raw {
            Value::Null => None,
            Value::Object(m) => Some(m),
            other => {
                return Err(ToolError::bad_args(format!(
                    "{} expects an object of arguments, got {}",
                    tool.name,
                    type_name(other)
                )))
            }
        };
        for key in map.into_iter().flat_map(|m| m.keys()) {
            if tool.param(key).is_none() {
                return Err(ToolError::bad_args(format!("{} has no argument '{key}'", tool.name)));
            }
        }
        for p in tool.params.iter().filter(|p| p.required) {
            if map.and_then(|m| m.get(p.name)).is_none_or(Value::is_null) {
                return Err(ToolError::bad_args(format!("{} requires argument '{}'", tool.name, p.name)));
            }
        }
        Ok(Self { tool, map })
    }

    fn get(&self, name: &str) -> Option<&'a Value> {
        debug_assert!(self.tool.param(name).is_some(), "undeclared argument {name}");
        self.map.and_then(|m| m.get(name)).filter(|v| !v.is_null())
    }

    fn opt_str(&self, name: &str) -> Result<Option<&'a str>, ToolError> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(ToolError::bad_args(format!(
                "{}: argument '{name}' must be a string, got {}",
                self.tool.name,
                type_name(other)
            ))),
        }
    }

    fn str(&self, name: &str) -> Result<&'a str, ToolError> {
        self.opt_str(name)?
            .ok_or_else(|| ToolError::bad_args(format!("{} requires argument '{name}'", self.tool.name)))
    }

    fn positive_int(&self, name: &str) -> Result<usize, ToolError> {
        let v = self
            .get(name)
            .ok_or_else(|| ToolError::bad_args(format!("{} requires argument '{name}'", self.tool.name)))?;
        match v.as_u64() {
            Some(k) if k >= 1 => Ok(usize::try_from(k).unwrap_or(usize::MAX)),
            _ => Err(ToolError::bad_args(format!(
                "{}: argument '{name}' must be a positive integer",
                self.tool.name
            ))),
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[derive(Debug, Clone)]
struct FrameEntry {
    standing_at: NodeId,
    facing: NodeId,
    frame: Frame,
}

/// Tools bound to one scene plus the session's frame table.
#[derive(Debug, Clone)]
pub struct Toolbox {
    scene: Arc<SceneGraph>,
    frames: Vec<FrameEntry>,
}

const FRAME_PREFIX: &str = "frame-";

impl Toolbox {
    pub fn new(scene: Arc<SceneGraph>) -> Self {
        Self {
            scene,
            frames: Vec::new(),
        }
    }

    pub fn scene(&self) -> &Arc<SceneGraph> {
        &self.scene
    }

    /// Runs one tool. Results are rounded and key-sorted.
    pub fn call(&mut self, name: &str, args: &Value) -> Result<Value, ToolError> {
        let tool = find_tool(name).ok_or_else(|| {
            let hint = CATALOG
                .iter()
                .map(|t| (strsim::normalized_levenshtein(name, t.name), t.name))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .filter(|(s, _)| *s >= ACCEPT_THRESHOLD)
                .map(|(_, n)| format!("; did you mean '{n}'?"))
                .unwrap_or_default();
            ToolError::new(ErrorCode::UnknownTool, format!("unknown tool '{name}'{hint}"))
        })?;
        let args = Args::parse(tool, args)?;
        let mut out = match tool.name {
            "mem_get_scene_context" => self.mem_get_scene_context(),
            "sg_search" => self.sg_search(&args),
            "sg_get_node" => self.sg_get_node(&args),
            "sg_get_children" => self.sg_get_children(&args),
            "sg_list_objects" => self.sg_list_objects(&args),
            "sg_nearest_objects" => self.sg_nearest_objects(&args),
            "sg_get_relations" => self.sg_get_relations(&args),
            "geom_get_dimensions" => self.geom_get_dimensions(&args),
            "geom_get_volume" => self.geom_get_volume(&args),
            "geom_get_surface_area" => self.geom_get_surface_area(&args),
            "geom_distance" => self.geom_distance(&args),
            "geom_room_size" => self.geom_room_size(&args),
            "loc_get_position" => self.loc_get_position(&args),
            "loc_get_orientation" => self.loc_get_orientation(&args),
            "loc_build_frame" => self.loc_build_frame(&args),
            "loc_project" => self.loc_project(&args),
            other => unreachable!("catalog tool {other} has no handler"),
        }?;
        round_floats(&mut out);
        Ok(out)
    }

    fn object(&self, args: &Args<'_>, name: &str) -> Result<&ObjectNode, ToolError> {
        Ok(self.scene.object(args.str(name)?)?)
    }

    fn mem_get_scene_context(&self) -> Result<Value, ToolError> {
        Ok(serde_json::to_value(scene_context(&self.scene)).expect("context serializes"))
    }

    fn sg_search(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let query = args.str("query")?;
        let scope = args.opt_str("scope")?;
        if let Some(s) = scope {
            self.scene.get_node(s)?;
        }
        let resolution = resolve_class(query, self.scene.class_set());
        let results: Vec<Value> = match &resolution.resolved_class {
            Some(class) => self
                .scene
                .objects_by_class(class, scope)?
                .into_iter()
                .map(|id| json!({"id": id, "class": class, "score": resolution.score}))
                .collect(),
            None => Vec::new(),
        };
        Ok(json!({
            "query": query,
            "scope": scope,
            "resolution": resolution,
            "results": results,
        }))
    }

    fn sg_get_node(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let id = args.str("id")?;
        let node = self.scene.get_node(id)?;
        let parent = self.scene.parent(id)?;
        let mut v = match node {
            NodeRef::Building(b) => json!({"class_label": b.class_label}),
            NodeRef::Floor(f) => json!({
                "level_index": f.level_index,
                "aabb": {"min": vec3(&f.aabb.min), "max": vec3(&f.aabb.max)},
                "area_m2": f.area_m2,
            }),
            NodeRef::Room(r) => json!({
                "name": r.name,
                "aabb": {"min": vec3(&r.aabb.min), "max": vec3(&r.aabb.max)},
                "area_m2": r.area_m2,
                "footprint": r.footprint.as_ref().map(|p| p.iter().map(|q| json!([q.x, q.y])).collect::<Vec<_>>()),
            }),
            NodeRef::Object(o) => json!({
                "class_label": o.class_label,
                "centroid": vec3(&o.centroid),
                "obb": {
                    "center": vec3(&o.obb.center),
                    "half_extents": vec3(&o.obb.half_extents),
                    "yaw": o.obb.yaw,
                },
                "volume_m3": o.volume_m3,
                "surface_area_m2": o.surface_area_m2,
                "facing": o.facing.as_ref().map(vec3),
                "sample_count": o.samples.as_ref().map_or(0, |s| s.len()),
            }),
        };
        let map = v.as_object_mut().expect("object literal");
        map.insert("id".into(), json!(id));
        map.insert("layer".into(), json!(node.layer()));
        map.insert("parent".into(), json!(parent));
        map.insert("unit".into(), json!("m"));
        Ok(v)
    }

    fn sg_get_children(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let id = args.str("id")?;
        Ok(json!({"id": id, "children": self.scene.children(id)?}))
    }

    fn class_filter(&self, raw: Option<&str>) -> Option<String> {
        raw.map(|c| {
            let n = normalize_term(c);
            synonym_of(&n).map(str::to_string).unwrap_or(n)
        })
    }

    fn sg_list_objects(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let scope = args.opt_str("scope")?;
        let class = self.class_filter(args.opt_str("class_label")?);
        let ids = match scope {
            Some(s) => self.scene.subtree_objects(s)?,
            None => self.scene.objects().map(|o| o.id.clone()).collect(),
        };
        let objects: Vec<Value> = ids
            .iter()
            .map(|id| self.scene.object(id.as_str()).expect("listed object exists"))
            .filter(|o| class.as_ref().is_none_or(|c| &o.class_label == c))
            .map(|o| json!({"id": o.id, "class": o.class_label}))
            .collect();
        Ok(json!({"scope": scope, "class_label": class, "objects": objects}))
    }

    fn sg_nearest_objects(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let anchor = self.object(args, "anchor")?;
        let k = args.positive_int("k")?;
        let class = self.class_filter(args.opt_str("class_filter")?);
        let mut ranked = Vec::new();
        for o in self.scene.objects() {
            if o.id == anchor.id || class.as_ref().is_some_and(|c| &o.class_label != c) {
                continue;
            }
            let d = distance(&anchor.geometry(), &o.geometry(), DistanceMode::Surface)?;
            ranked.push((d, o));
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
        ranked.truncate(k);
        let neighbors: Vec<Value> = ranked
            .iter()
            .map(|(d, o)| json!({"id": o.id, "class": o.class_label, "distance": d}))
            .collect();
        Ok(json!({
            "anchor": anchor.id,
            "k": k,
            "class_filter": class,
            "mode": DistanceMode::Surface,
            "neighbors": neighbors,
            "unit": "m",
        }))
    }

    fn sg_get_relations(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let id = args.str("id")?;
        let relations: Vec<Value> = self
            .scene
            .near_neighbors(id)?
            .into_iter()
            .map(|t| json!({"relation": "near", "target": t}))
            .collect();
        Ok(json!({"id": id, "relations": relations}))
    }

    fn geom_get_dimensions(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let o = self.object(args, "id")?;
        let h = o.obb.half_extents * 200.0;
        let (width, depth) = if h.x >= h.y { (h.x, h.y) } else { (h.y, h.x) };
        let longest = width.max(h.z);
        Ok(json!({
            "id": o.id,
            "width": width,
            "depth": depth,
            "height": h.z,
            "longest": longest,
            "unit": "cm",
        }))
    }

    fn geom_get_volume(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let o = self.object(args, "id")?;
        Ok(json!({"id": o.id, "volume": o.volume_m3, "unit": "m3"}))
    }

    fn geom_get_surface_area(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let o = self.object(args, "id")?;
        Ok(json!({"id": o.id, "surface_area": o.surface_area_m2, "unit": "m2"}))
    }

    fn geom_distance(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let a = self.object(args, "a")?;
        let b = self.object(args, "b")?;
        let mode = match args.opt_str("mode")? {
            None | Some("surface") => DistanceMode::Surface,
            Some("centroid") => DistanceMode::Centroid,
            Some(other) => {
                return Err(ToolError::bad_args(format!(
                    "geom_distance: mode must be 'surface' or 'centroid', got '{other}'"
                )))
            }
        };
        let d = distance(&a.geometry(), &b.geometry(), mode)?;
        Ok(json!({"a": a.id, "b": b.id, "mode": mode, "distance": d, "unit": "m"}))
    }

    fn geom_room_size(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let r = self.scene.room(args.str("room")?)?;
        Ok(json!({"room": r.id, "area": r.area_m2, "unit": "m2"}))
    }

    fn loc_get_position(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let o = self.object(args, "id")?;
        Ok(json!({"id": o.id, "position": vec3(&o.centroid), "unit": "m"}))
    }

    fn loc_get_orientation(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let o = self.object(args, "id")?;
        let f = o.facing.ok_or_else(|| {
            ToolError::new(
                ErrorCode::MissingOrientation,
                format!("object {} has no annotated facing direction", o.id),
            )
        })?;
        Ok(json!({"id": o.id, "facing": vec3(&f), "unit": "unit_vector"}))
    }

    fn loc_build_frame(&mut self, args: &Args<'_>) -> Result<Value, ToolError> {
        let standing = self.object(args, "standing_at")?;
        let facing = self.object(args, "facing")?;
        let (standing_id, facing_id) = (standing.id.clone(), facing.id.clone());
        let existing = self
            .frames
            .iter()
            .position(|e| e.standing_at == standing_id && e.facing == facing_id);
        let index = match existing {
            Some(i) => i,
            None => {
                let frame = build_egocentric_frame(&standing.centroid, &facing.centroid)?;
                self.frames.push(FrameEntry {
                    standing_at: standing_id,
                    facing: facing_id,
                    frame,
                });
                self.frames.len() - 1
            }
        };
        let e = &self.frames[index];
        Ok(json!({
            "frame": format!("{FRAME_PREFIX}{index}"),
            "standing_at": e.standing_at,
            "facing": e.facing,
            "origin": vec3(&e.frame.origin),
            "forward": vec3(&e.frame.forward),
            "left": vec3(&e.frame.left),
            "up": vec3(&e.frame.up),
            "unit": "m",
        }))
    }

    /// Frame behind a handle issued by this toolbox.
    pub fn frame(&self, handle: &str) -> Option<&Frame> {
        let index: usize = handle.strip_prefix(FRAME_PREFIX)?.parse().ok()?;
        if format!("{FRAME_PREFIX}{index}") != handle {
            return None;
        }
        self.frames.get(index).map(|e| &e.frame)
    }

    fn loc_project(&self, args: &Args<'_>) -> Result<Value, ToolError> {
        let target = self.object(args, "target")?;
        let handle = args.str("frame")?;
        let difficulty = match args.opt_str("difficulty")? {
            None => None,
            Some(d) => Some(d.parse::<Difficulty>().map_err(ToolError::bad_args)?),
        };
        let frame = self.frame(handle).ok_or_else(|| {
            ToolError::new(ErrorCode::UnknownFrame, format!("no frame '{handle}' in this session"))
        })?;
        let local = frame.project(&target.centroid);
        let mut v = json!({
            "target": target.id,
            "frame": handle,
            "local": {"forward": local.x, "left": local.y, "up": local.z},
            "unit": "m",
        });
        if let Some(d) = difficulty {
            let label = classify_direction(&local, d)?;
            let map = v.as_object_mut().expect("object literal");
            map.insert("difficulty".into(), json!(d));
            map.insert("label".into(), json!(label));
        }
        Ok(v)
    }
}
