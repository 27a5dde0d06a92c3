//! Static tool catalog.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    /// Any node id.
    NodeId,
    /// Id of an object node.
    ObjectId,
    /// Id of a room node.
    RoomId,
    /// Free text, only accepted by search tools.
    Text,
    /// Exact class label.
    ClassLabel,
    PositiveInteger,
    /// `surface` or `centroid`.
    DistanceMode,
    /// `easy`, `medium` or `hard`.
    Difficulty,
    FrameHandle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: ParamType,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolDescriptor {
    pub name: &'static str,
    pub params: &'static [ParamSpec],
    pub result_schema: &'static str,
    pub doc: &'static str,
}

impl ToolDescriptor {
    pub fn namespace(&self) -> &'static str {
        self.name.split('_').next().unwrap_or("")
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

pub const NAMESPACES: [&str; 4] = ["mem", "sg", "geom", "loc"];

const fn req(name: &'static str, kind: ParamType) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: true,
    }
}

const fn opt(name: &'static str, kind: ParamType) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: false,
    }
}

use ParamType::*;

pub const CATALOG: &[ToolDescriptor] = &[
    ToolDescriptor {
        name: "mem_get_scene_context",
        params: &[],
        result_schema: "{rows[{node_type,name,class}], classes[{class,count,ids}], totals{objects,rooms,floors,buildings}, totals_line, text}",
        doc: "Summary of the loaded scene graph: hierarchy, object classes with counts and ids.",
    },
    ToolDescriptor {
        name: "sg_search",
        params: &[req("query", Text), opt("scope", NodeId)],
        result_schema: "{query, resolution{query,resolved_class,score,candidates[{class,score}]}, results[{id,class,score}]}",
        doc: "Resolve a free-text object name to a scene class and list its object ids.",
    },
    ToolDescriptor {
        name: "sg_get_node",
        params: &[req("id", NodeId)],
        result_schema: "{id, layer, ...layer attributes}",
        doc: "Attributes of one node of any layer.",
    },
    ToolDescriptor {
        name: "sg_get_children",
        params: &[req("id", NodeId)],
        result_schema: "{id, children[id]}",
        doc: "Hierarchy children of a node in id order.",
    },
    ToolDescriptor {
        name: "sg_list_objects",
        params: &[opt("scope", NodeId), opt("class_label", ClassLabel)],
        result_schema: "{scope, class_label, objects[{id,class}]}",
        doc: "Objects under a node, optionally of one exact class.",
    },
    ToolDescriptor {
        name: "sg_nearest_objects",
        params: &[req("anchor", ObjectId), req("k", PositiveInteger), opt("class_filter", ClassLabel)],
        result_schema: "{anchor, k, mode, neighbors[{id,class,distance}], unit}",
        doc: "The k objects closest to an anchor object by surface distance.",
    },
    ToolDescriptor {
        name: "sg_get_relations",
        params: &[req("id", ObjectId)],
        result_schema: "{id, relations[{relation,target}]}",
        doc: "Relational edges of an object.",
    },
    ToolDescriptor {
        name: "geom_get_dimensions",
        params: &[req("id", ObjectId)],
        result_schema: "{id, width, depth, height, longest, unit}",
        doc: "Bounding box extents of an object in centimeters, horizontal sides in descending order.",
    },
    ToolDescriptor {
        name: "geom_get_volume",
        params: &[req("id", ObjectId)],
        result_schema: "{id, volume, unit}",
        doc: "Volume of an object in cubic meters.",
    },
    ToolDescriptor {
        name: "geom_get_surface_area",
        params: &[req("id", ObjectId)],
        result_schema: "{id, surface_area, unit}",
        doc: "Surface area of an object in square meters.",
    },
    ToolDescriptor {
        name: "geom_distance",
        params: &[req("a", ObjectId), req("b", ObjectId), opt("mode", DistanceMode)],
        result_schema: "{a, b, mode, distance, unit}",
        doc: "Distance in meters between two objects; surface (closest points) by default.",
    },
    ToolDescriptor {
        name: "geom_room_size",
        params: &[req("room", RoomId)],
        result_schema: "{room, area, unit}",
        doc: "Floor area of a room in square meters.",
    },
    ToolDescriptor {
        name: "loc_get_position",
        params: &[req("id", ObjectId)],
        result_schema: "{id, position[x,y,z], unit}",
        doc: "World position (centroid) of an object in meters.",
    },
    ToolDescriptor {
        name: "loc_get_orientation",
        params: &[req("id", ObjectId)],
        result_schema: "{id, facing[x,y,z], unit}",
        doc: "Horizontal unit facing direction of an object.",
    },
    ToolDescriptor {
        name: "loc_build_frame",
        params: &[req("standing_at", ObjectId), req("facing", ObjectId)],
        result_schema: "{frame, standing_at, facing, origin, forward, left, up, unit}",
        doc: "Egocentric frame standing at one object and looking toward another.",
    },
    ToolDescriptor {
        name: "loc_project",
        params: &[req("target", ObjectId), req("frame", FrameHandle), opt("difficulty", Difficulty)],
        result_schema: "{target, frame, local{forward,left,up}, unit, difficulty?, label?}",
        doc: "Coordinates of an object in an egocentric frame, with a direction label when a difficulty is given.",
    },
];

pub fn catalog() -> &'static [ToolDescriptor] {
    CATALOG
}

pub fn find_tool(name: &str) -> Option<&'static ToolDescriptor> {
    CATALOG.iter().find(|t| t.name == name)
}
