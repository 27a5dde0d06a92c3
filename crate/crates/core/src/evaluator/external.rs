//! External agents reached over TCP with a single `answer` method on the
//! line-delimited wire format.
//!
//! Request: `{"id": n, "method": "answer", "params": <Question without
//! ground_truth>}`. Success value: `{"raw": "<final message>", "trace":
//! [TraceEntry...]}`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{Agent, AgentOutcome, Question};
use crate::scene_graph::SceneGraph;
use crate::tool_server::{parse_request, Response, SceneStore, TraceEntry};
use crate::toolbox::{ErrorCode, ToolError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone)]
pub struct EndpointAgent {
    pub addr: String,
    pub timeout: Duration,
}

impl EndpointAgent {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    fn exchange(&self, q: &Question) -> Result<(String, Vec<TraceEntry>), String> {
        let addr = self
            .addr
            .to_socket_addrs()
            .map_err(|e| format!("EndpointError: {e}"))?
            .next()
            .ok_or_else(|| format!("EndpointError: '{}' resolves to no address", self.addr))?;
        let stream = TcpStream::connect_timeout(&addr, self.timeout).map_err(|e| format!("EndpointError: {e}"))?;
        stream.set_read_timeout(Some(self.timeout)).map_err(|e| format!("EndpointError: {e}"))?;
        stream.set_write_timeout(Some(self.timeout)).map_err(|e| format!("EndpointError: {e}"))?;
        let mut params = serde_json::to_value(q).expect("question serializes");
        params.as_object_mut().expect("question is an object").remove("ground_truth");
        let request = json!({ "id": 1, "method": "answer", "params": params });
        let mut writer = stream.try_clone().map_err(|e| format!("EndpointError: {e}"))?;
        writeln!(writer, "{request}").map_err(|e| format!("EndpointError: {e}"))?;
        let mut line = String::new();
        match BufReader::new(stream).read_line(&mut line) {
            Ok(0) => return Err("EndpointError: connection closed before an answer".into()),
            Ok(_) => {}
            Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                return Err(format!("Timeout: no answer within {} s", self.timeout.as_secs_f64()))
            }
            Err(e) => return Err(format!("EndpointError: {e}")),
        }
        let response: Response = serde_json::from_str(&line).map_err(|e| format!("MalformedAnswer: bad response line: {e}"))?;
        if !response.ok {
            let e = response.error.map(|e| format!("{}: {}", e.code.as_str(), e.message));
            return Err(e.unwrap_or_else(|| "EndpointError: failure without error".into()));
        }
        let value = response.value.unwrap_or(Value::Null);
        let raw = value["raw"]
            .as_str()
            .ok_or("MalformedAnswer: response value lacks 'raw'")?
            .to_string();
        let trace = match value.get("trace") {
            None | Some(Value::Null) => Vec::new(),
            Some(t) => serde_json::from_value(t.clone()).map_err(|e| format!("MalformedAnswer: bad trace: {e}"))?,
        };
        Ok((raw, trace))
    }
}

impl Agent for EndpointAgent {
    fn name(&self) -> String {
        format!("endpoint:{}", self.addr)
    }

    fn answer(&self, question: &Question, _scene: Arc<SceneGraph>) -> AgentOutcome {
        match self.exchange(question) {
            Ok((raw, trace)) => AgentOutcome {
                raw: Some(raw),
                trace,
                error: None,
            },
            Err(e) => AgentOutcome {
                raw: None,
                trace: Vec::new(),
                error: Some(e),
            },
        }
    }
}

fn handle_answer(mut params: Map<String, Value>, store: &SceneStore, agent: &dyn Agent) -> Result<Value, ToolError> {
    // Placeholder so the shared type parses; the endpoint never sees truth.
    params.entry("ground_truth").or_insert(json!(1.0));
    let q: Question = serde_json::from_value(Value::Object(params)).map_err(|e| ToolError::new(ErrorCode::BadArguments, e.to_string()))?;
    let scene = store
        .get(&q.scene_id)
        .map_err(|e| ToolError::new(ErrorCode::BadArguments, e.to_string()))?;
    let out = agent.answer(&q, scene);
    match (out.raw, out.error) {
        (Some(raw), _) => Ok(json!({ "raw": raw, "trace": out.trace })),
        (None, e) => Ok(json!({ "raw": e.unwrap_or_default(), "trace": out.trace })),
    }
}

fn serve_connection(stream: TcpStream, store: &SceneStore, agent: &dyn Agent) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match parse_request(&line) {
            Err((id, e)) => Response::failure(id, e),
            Ok(req) if req.method == "answer" => match handle_answer(req.params, store, agent) {
                Ok(v) => Response::success(req.id, v),
                Err(e) => Response::failure(req.id, e),
            },
            Ok(req) => Response::failure(
                req.id,
                ToolError::new(ErrorCode::UnknownTool, format!("unknown method '{}'; expected 'answer'", req.method)),
            ),
        };
        writeln!(writer, "{}", response.to_line())?;
    }
    Ok(())
}

/// Answers questions on `listener` with `agent`, one thread per connection.
/// Useful as a reference endpoint and for exercising the external mode.
pub fn serve_answer_endpoint(listener: TcpListener, store: Arc<SceneStore>, agent: Arc<dyn Agent + Send>) {
    for stream in listener.incoming() {
        let Ok(stream) = stream else { continue };
        let (store, agent) = (store.clone(), agent.clone());
        thread::spawn(move || {
            if let Err(e) = serve_connection(stream, &store, agent.as_ref()) {
                log::debug!("answer endpoint connection ended: {e}");
            }
        });
    }
}
