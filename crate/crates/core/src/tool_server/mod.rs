//! Line-delimited JSON tool protocol.
//!
//! Each request is one line `{"id": <integer>, "method": ..., "params": {...}}`
//! and receives exactly one response line `{"id", "ok", "value"}` or
//! `{"id", "ok", "error": {"code", "message"}}`. Methods: `initialize`,
//! `list_tools`, `call`, `get_trace`, `shutdown`.

mod store;
mod trace;
mod transport;

pub use store::{is_valid_scene_id, SceneStore, StoreError};
pub use trace::{
    now_ms, read_trace_file, replay_entries, replay_trace_file, write_trace_file, ReplayError, ReplayReport, ToolCall,
    ToolResult, TraceEntry, TraceHeader, TraceWriter, LOG_DIR_ENV,
};
pub use transport::{run_session, serve_stdio, serve_tcp, serve_tcp_listener};

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::scene_graph::SceneGraph;
use crate::toolbox::{catalog, ErrorCode, ToolError, Toolbox};

pub const METHODS: [&str; 5] = ["initialize", "list_tools", "call", "get_trace", "shutdown"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ToolError>,
}

impl Response {
    pub fn success(id: Value, value: Value) -> Self {
        Self {
            id,
            ok: true,
            value: Some(value),
            error: None,
        }
    }

    pub fn failure(id: Value, error: ToolError) -> Self {
        Self {
            id,
            ok: false,
            value: None,
            error: Some(error),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

fn bad(msg: impl Into<String>) -> ToolError {
    ToolError::new(ErrorCode::BadArguments, msg)
}

/// A request after framing checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: Value,
    pub method: String,
    pub params: Map<String, Value>,
}

/// Parses one line. On failure returns the id to echo (null when the id
/// itself is unusable) with the error.
pub fn parse_request(line: &str) -> Result<Request, (Value, ToolError)> {
    let raw: Value = serde_json::from_str(line).map_err(|e| (Value::Null, bad(format!("malformed JSON: {e}"))))?;
    let Value::Object(mut obj) = raw else {
        return Err((Value::Null, bad("request must be a JSON object")));
    };
    let id = match obj.remove("id") {
        Some(Value::Number(n)) if n.is_i64() || n.is_u64() => Value::Number(n),
        Some(_) => return Err((Value::Null, bad("request id must be an integer"))),
        None => return Err((Value::Null, bad("request is missing 'id'"))),
    };
    let method = match obj.remove("method") {
        Some(Value::String(m)) => m,
        Some(_) => return Err((id, bad("'method' must be a string"))),
        None => return Err((id, bad("request is missing 'method'"))),
    };
    let params = match obj.remove("params") {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return Err((id, bad("'params' must be an object"))),
    };
    obj.remove("jsonrpc");
    if let Some(extra) = obj.keys().next() {
        return Err((id, bad(format!("unexpected request field '{extra}'"))));
    }
    Ok(Request { id, method, params })
}

fn expect_keys(method: &str, params: &Map<String, Value>, allowed: &[&str]) -> Result<(), ToolError> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(bad(format!("{method} has no parameter '{k}'"))),
        None => Ok(()),
    }
}

static SESSION_COUNTER: AtomicU64 = AtomicU64::new(0);

fn next_session_id() -> String {
    format!(
        "session-{}-{}-{}",
        std::process::id(),
        now_ms(),
        SESSION_COUNTER.fetch_add(1, Ordering::Relaxed)
    )
}

struct Bound {
    scene_id: String,
    toolbox: Toolbox,
}

/// One client's serial request loop state: at most one bound scene, its
/// frame handles and the append-only call log.
pub struct Session {
    id: String,
    store: Option<Arc<SceneStore>>,
    bound: Option<Bound>,
    trace: Vec<TraceEntry>,
    log_dir: Option<PathBuf>,
    writer: Option<TraceWriter>,
    closed: bool,
}

impl Session {
    /// Unbound session that resolves `initialize` through `store`. Trace
    /// files go to `$RIEMIND_LOG_DIR` when it is set.
    pub fn new(store: Arc<SceneStore>) -> Self {
        Self {
            id: next_session_id(),
            store: Some(store),
            bound: None,
            trace: Vec::new(),
            log_dir: std::env::var_os(LOG_DIR_ENV).map(PathBuf::from),
            writer: None,
            closed: false,
        }
    }

    /// Session already bound to a scene, without a store or trace file.
    pub fn with_scene(scene_id: impl Into<String>, scene: Arc<SceneGraph>) -> Self {
        Self {
            id: next_session_id(),
            store: None,
            bound: Some(Bound {
                scene_id: scene_id.into(),
                toolbox: Toolbox::new(scene),
            }),
            trace: Vec::new(),
            log_dir: None,
            writer: None,
            closed: false,
        }
    }

    /// Overrides the trace directory taken from the environment.
    pub fn set_log_dir(&mut self, dir: Option<PathBuf>) {
        self.log_dir = dir;
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn scene_id(&self) -> Option<&str> {
        self.bound.as_ref().map(|b| b.scene_id.as_str())
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn header(&self) -> Option<TraceHeader> {
        self.scene_id().map(|s| TraceHeader {
            session_id: self.id.clone(),
            scene_id: s.to_string(),
        })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Handles one protocol line and returns the response line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match parse_request(line) {
            Ok(req) => self.handle(req),
            Err((id, e)) => Response::failure(id, e),
        };
        response.to_line()
    }

    pub fn handle(&mut self, req: Request) -> Response {
        let id = req.id.clone();
        match self.dispatch(req) {
            Ok(v) => Response::success(id, v),
            Err(e) => Response::failure(id, e),
        }
    }

    fn dispatch(&mut self, req: Request) -> Result<Value, ToolError> {
        let p = &req.params;
        match req.method.as_str() {
            "initialize" => {
                expect_keys("initialize", p, &["scene_id"])?;
                let scene_id = match p.get("scene_id") {
                    Some(Value::String(s)) => s.clone(),
                    Some(_) => return Err(bad("initialize: 'scene_id' must be a string")),
                    None => return Err(bad("initialize requires 'scene_id'")),
                };
                self.initialize(&scene_id)
            }
            "list_tools" => {
                expect_keys("list_tools", p, &[])?;
                Ok(json!({ "tools": catalog() }))
            }
            "call" => {
                expect_keys("call", p, &["tool", "args"])?;
                let tool = match p.get("tool") {
                    Some(Value::String(s)) => s.clone(),
                    Some(_) => return Err(bad("call: 'tool' must be a string")),
                    None => return Err(bad("call requires 'tool'")),
                };
                let args = p.get("args").cloned().unwrap_or(Value::Null);
                self.call_tool(&tool, &args)
            }
            "get_trace" => {
                expect_keys("get_trace", p, &[])?;
                Ok(json!({
                    "session_id": self.id,
                    "scene_id": self.scene_id(),
                    "entries": self.trace,
                }))
            }
            "shutdown" => {
                expect_keys("shutdown", p, &[])?;
                self.closed = true;
                Ok(json!({ "session_id": self.id, "calls": self.trace.len() }))
            }
            other => Err(ToolError::new(
                ErrorCode::UnknownTool,
                format!("unknown method '{other}'; expected one of {}", METHODS.join(", ")),
            )),
        }
    }

    fn initialize(&mut self, scene_id: &str) -> Result<Value, ToolError> {
        if let Some(b) = &self.bound {
            if b.scene_id != scene_id {
                return Err(bad(format!("session is already bound to scene '{}'", b.scene_id)));
            }
        } else {
            let store = self
                .store
                .as_ref()
                .ok_or_else(|| ToolError::new(ErrorCode::NoSceneLoaded, "session has no scene store"))?;
            let scene = store.get(scene_id).map_err(|e| bad(e.to_string()))?;
            self.bound = Some(Bound {
                scene_id: scene_id.to_string(),
                toolbox: Toolbox::new(scene),
            });
            self.open_log();
        }
        let b = self.bound.as_ref().expect("bound above");
        let scene = b.toolbox.scene();
        Ok(json!({
            "session_id": self.id,
            "scene_id": b.scene_id,
            "objects": scene.objects().count(),
            "rooms": scene.rooms().count(),
            "floors": scene.floors().count(),
            "tools": catalog().len(),
        }))
    }

    fn open_log(&mut self) {
        let (Some(dir), Some(header)) = (&self.log_dir, self.header()) else {
            return;
        };
        let path = dir.join(format!("{}.jsonl", self.id));
        match TraceWriter::create(&path, &header) {
            Ok(w) => self.writer = Some(w),
            Err(e) => log::warn!("cannot open trace file {}: {e}", path.display()),
        }
    }

    /// Runs a tool and appends the call to the trace.
    pub fn call_tool(&mut self, tool: &str, args: &Value) -> Result<Value, ToolError> {
        let bound = self
            .bound
            .as_mut()
            .ok_or_else(|| ToolError::new(ErrorCode::NoSceneLoaded, "call 'initialize' with a scene_id first"))?;
        let result = bound.toolbox.call(tool, args);
        let entry = TraceEntry {
            seq: self.trace.len() as u64,
            ts_ms: now_ms(),
            call: ToolCall {
                tool: tool.to_string(),
                args: args.clone(),
            },
            result: ToolResult::from(&result),
        };
        if let Some(w) = &mut self.writer {
            if let Err(e) = w.append(&entry) {
                log::warn!("trace write failed for {}: {e}", self.id);
                self.writer = None;
            }
        }
        self.trace.push(entry);
        result
    }
}
