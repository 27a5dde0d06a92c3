//! Deterministic answerer that runs one fixed tool pipeline per question
//! type against a fresh session.
//!
//! Entity names are either resolved with `sg_search` (a counted tool call)
//! or, for the observer's position and heading, against the scene context
//! that a prompt would carry.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::templates::{self, Entities};
use super::{Agent, AgentOutcome, Question};
use crate::scene_graph::SceneGraph;
use crate::tool_server::Session;
use crate::toolbox::{resolve_class, scene_context, SceneContext, ToolError};

#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedAgent;

enum Failure {
    Resolution(String),
    Tool(ToolError),
    Unparsed,
}

impl From<ToolError> for Failure {
    fn from(e: ToolError) -> Self {
        Failure::Tool(e)
    }
}

impl Failure {
    fn describe(&self) -> String {
        match self {
            Failure::Resolution(m) => format!("ResolutionFailure: {m}"),
            Failure::Tool(e) => format!("{}: {}", e.code.as_str(), e.message),
            Failure::Unparsed => "ResolutionFailure: question text does not match its type's template".into(),
        }
    }
}

struct Run<'a> {
    session: Session,
    context: &'a SceneContext,
    evidence: Vec<String>,
}

impl Run<'_> {
    fn call(&mut self, tool: &str, args: Value) -> Result<Value, Failure> {
        self.evidence.push(tool.to_string());
        Ok(self.session.call_tool(tool, &args)?)
    }

    /// Object ids `sg_search` returns for `name`.
    fn search(&mut self, name: &str) -> Result<Vec<String>, Failure> {
        let v = self.call("sg_search", json!({ "query": name }))?;
        let ids: Vec<String> = v["results"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|r| r["id"].as_str().map(str::to_string))
            .collect();
        if ids.is_empty() {
            return Err(Failure::Resolution(format!("no object matches '{name}'")));
        }
        Ok(ids)
    }

    fn search_one(&mut self, name: &str) -> Result<String, Failure> {
        let mut ids = self.search(name)?;
        if ids.len() > 1 {
            return Err(Failure::Resolution(format!("'{name}' matches {} objects", ids.len())));
        }
        Ok(ids.remove(0))
    }

    fn context_class(&self, name: &str) -> Result<String, Failure> {
        resolve_class(name, self.context.classes.iter().map(|c| c.class.as_str()))
            .resolved_class
            .ok_or_else(|| Failure::Resolution(format!("'{name}' is not a class in this scene")))
    }

    /// The single object of class `name`, looked up in the context.
    fn context_object(&self, name: &str) -> Result<String, Failure> {
        let class = self.context_class(name)?;
        let summary = self.context.classes.iter().find(|c| c.class == class).expect("class from context");
        match summary.ids.as_slice() {
            [id] => Ok(id.to_string()),
            ids => Err(Failure::Resolution(format!("'{name}' matches {} objects", ids.len()))),
        }
    }

    fn number(v: &Value, field: &str) -> Result<f64, Failure> {
        v[field]
            .as_f64()
            .ok_or_else(|| Failure::Resolution(format!("tool result lacks numeric '{field}'")))
    }

    fn pipeline(&mut self, q: &Question) -> Result<(Value, Map<String, Value>), Failure> {
        let entities = templates::parse(q.qtype, &q.text).ok_or(Failure::Unparsed)?;
        let mut data = Map::new();
        let answer = match entities {
            Entities::Count { object } => {
                let ids = self.search(&object).or_else(|e| match e {
                    Failure::Resolution(_) => Ok(Vec::new()),
                    other => Err(other),
                })?;
                data.insert("ids".into(), json!(ids));
                json!(ids.len())
            }
            Entities::Size { object } => {
                let id = self.search_one(&object)?;
                let dims = self.call("geom_get_dimensions", json!({ "id": id }))?;
                data.insert("id".into(), json!(id));
                data.insert("unit".into(), json!("cm"));
                json!(Self::number(&dims, "longest")?)
            }
            Entities::Distance { a, b } => {
                let (ia, ib) = (self.search_one(&a)?, self.search_one(&b)?);
                let d = self.call("geom_distance", json!({ "a": ia, "b": ib, "mode": "surface" }))?;
                data.insert("ids".into(), json!([ia, ib]));
                data.insert("unit".into(), json!("m"));
                json!(Self::number(&d, "distance")?)
            }
            Entities::Room => {
                let room = self
                    .context
                    .rows
                    .iter()
                    .find(|r| r.node_type == "RoomNode")
                    .map(|r| r.name.clone())
                    .ok_or_else(|| Failure::Resolution("scene has no room".into()))?;
                let v = self.call("geom_room_size", json!({ "room": room }))?;
                data.insert("room".into(), json!(room));
                data.insert("unit".into(), json!("m2"));
                json!(Self::number(&v, "area")?)
            }
            Entities::Closest { anchor, candidates } => {
                let anchor_id = self.search_one(&anchor)?;
                let classes = candidates
                    .iter()
                    .map(|c| self.context_class(c).map(|class| (class, c.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                let v = self.call("sg_nearest_objects", json!({ "anchor": anchor_id, "k": self.context.totals.objects }))?;
                let nearest = v["neighbors"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .find_map(|n| {
                        let class = n["class"].as_str()?;
                        classes.iter().find(|(c, _)| c == class).map(|(c, label)| (c.clone(), label.clone(), n["id"].clone()))
                    })
                    .ok_or_else(|| Failure::Resolution("no candidate is present in the scene".into()))?;
                data.insert("nearest_id".into(), nearest.2);
                data.insert("class".into(), json!(nearest.0));
                json!(nearest.1)
            }
            Entities::Direction { standing, facing, target } => {
                let standing_id = self.context_object(&standing)?;
                let facing_id = self.context_object(&facing)?;
                let target_id = self.search_one(&target)?;
                self.call("loc_get_position", json!({ "id": standing_id }))?;
                self.call("loc_get_orientation", json!({ "id": standing_id }))?;
                let frame = self.call("loc_build_frame", json!({ "standing_at": standing_id, "facing": facing_id }))?;
                let handle = frame["frame"].clone();
                let difficulty = q.difficulty.ok_or_else(|| Failure::Resolution("direction question without difficulty".into()))?;
                let p = self.call(
                    "loc_project",
                    json!({ "target": target_id, "frame": handle, "difficulty": difficulty }),
                )?;
                data.insert("frame".into(), handle);
                data.insert("local".into(), p["local"].clone());
                p["label"].clone()
            }
        };
        Ok((answer, data))
    }
}

impl ScriptedAgent {
    /// Runs the pipeline for `q` and returns the final message plus trace.
    pub fn run(&self, q: &Question, scene: Arc<SceneGraph>) -> AgentOutcome {
        let context = scene_context(&scene);
        let mut run = Run {
            session: Session::with_scene(q.scene_id.clone(), scene),
            context: &context,
            evidence: Vec::new(),
        };
        let result = run.pipeline(q);
        let trace = run.session.trace().to_vec();
        match result {
            Ok((answer, mut data)) => {
                data.insert("answer".into(), answer.clone());
                let summary = match &answer {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let raw = json!({
                    "summary": format!("{}: {summary}", q.qtype),
                    "evidence": run.evidence,
                    "data": data,
                });
                AgentOutcome {
                    raw: Some(raw.to_string()),
                    trace,
                    error: None,
                }
            }
            Err(f) => AgentOutcome {
                raw: None,
                trace,
                error: Some(f.describe()),
            },
        }
    }
}

impl Agent for ScriptedAgent {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn answer(&self, question: &Question, scene: Arc<SceneGraph>) -> AgentOutcome {
        self.run(question, scene)
    }
}
