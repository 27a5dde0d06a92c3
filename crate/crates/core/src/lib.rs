//! Metric 3D scene graphs for static indoor scenes, exposed to reasoning
//! agents through a deterministic, namespaced tool protocol.
//!
//! The crate is layered bottom-up:
//!
//! - [`geometry`]: pure computational-geometry kernel (hulls, boxes,
//!   distances, egocentric frames, direction classification).
//! - [`scene_graph`]: the four-layer building/floor/room/object graph.
//! - [`ingestion`]: canonical scene files to validated graphs.
//! - [`toolbox`]: the `mem_*`, `sg_*`, `geom_*` and `loc_*` tools.
//! - [`tool_server`]: line-delimited JSON protocol with per-session tracing.
//! - [`evaluator`]: question generation, scripted pipelines, scoring and
//!   benchmark reports for the six static question types.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod evaluator;
pub mod geometry;
pub mod ingestion;
pub mod scene_graph;
pub mod synth;
pub mod tool_server;
pub mod toolbox;

pub use geometry::Vec3;
pub use scene_graph::{NodeId, SceneGraph};
