//! Session call logs: in-memory entries, JSONL persistence and replay.
//!
//! A trace file holds one header line followed by one line per call.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::store::{SceneStore, StoreError};
use crate::scene_graph::SceneGraph;
use crate::toolbox::{ToolError, Toolbox};

/// Environment variable naming the directory for per-session trace files.
pub const LOG_DIR_ENV: &str = "RIEMIND_LOG_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub session_id: String,
    pub scene_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub tool: String,
    pub args: Value,
}

/// Outcome of one call in wire shape: `{ok, value}` or `{ok, error}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ToolError>,
}

impl From<&Result<Value, ToolError>> for ToolResult {
    fn from(r: &Result<Value, ToolError>) -> Self {
        match r {
            Ok(v) => Self {
                ok: true,
                value: Some(v.clone()),
                error: None,
            },
            Err(e) => Self {
                ok: false,
                value: None,
                error: Some(e.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub seq: u64,
    pub ts_ms: u64,
    pub call: ToolCall,
    pub result: ToolResult,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Appends header and entries to a JSONL file, flushing every line.
#[derive(Debug)]
pub struct TraceWriter {
    out: BufWriter<File>,
}

impl TraceWriter {
    pub fn create(path: &Path, header: &TraceHeader) -> io::Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = Self {
            out: BufWriter::new(File::create(path)?),
        };
        w.write_line(header)?;
        Ok(w)
    }

    fn write_line<T: Serialize>(&mut self, item: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, item)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    pub fn append(&mut self, entry: &TraceEntry) -> io::Result<()> {
        self.write_line(entry)
    }
}

pub fn write_trace_file(path: &Path, header: &TraceHeader, entries: &[TraceEntry]) -> io::Result<()> {
    let mut w = TraceWriter::create(path, header)?;
    for e in entries {
        w.append(e)?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot read trace: {0}")]
    Io(#[from] io::Error),
    #[error("malformed trace line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Scene(#[from] StoreError),
}

pub fn read_trace_file(path: &Path) -> Result<(TraceHeader, Vec<TraceEntry>), ReplayError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let malformed = |line: usize, e: serde_json::Error| ReplayError::Malformed {
        line: line + 1,
        message: e.to_string(),
    };
    let (n, first) = lines.next().ok_or(ReplayError::Malformed {
        line: 1,
        message: "empty trace".into(),
    })?;
    let header: TraceHeader = serde_json::from_str(&first?).map_err(|e| malformed(n, e))?;
    let mut entries = Vec::new();
    for (n, line) in lines {
        entries.push(serde_json::from_str(&line?).map_err(|e| malformed(n, e))?);
    }
    Ok((header, entries))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub scene_id: String,
    pub total: usize,
    pub identical: usize,
    /// Sequence numbers whose replayed result differs.
    pub mismatches: Vec<u64>,
}

impl ReplayReport {
    pub fn all_identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-executes logged calls in order on a fresh toolbox and compares the
/// serialized results byte for byte.
pub fn replay_entries(scene_id: &str, scene: Arc<SceneGraph>, entries: &[TraceEntry]) -> ReplayReport {
    let mut toolbox = Toolbox::new(scene);
    let mut mismatches = Vec::new();
    for e in entries {
        let fresh = ToolResult::from(&toolbox.call(&e.call.tool, &e.call.args));
        let a = serde_json::to_string(&fresh).expect("result serializes");
        let b = serde_json::to_string(&e.result).expect("result serializes");
        if a != b {
            mismatches.push(e.seq);
        }
    }
    ReplayReport {
        scene_id: scene_id.to_string(),
        total: entries.len(),
        identical: entries.len() - mismatches.len(),
        mismatches,
    }
}

pub fn replay_trace_file(path: &Path, store: &SceneStore) -> Result<ReplayReport, ReplayError> {
    let (header, entries) = read_trace_file(path)?;
    let scene = store.get(&header.scene_id)?;
    Ok(replay_entries(&header.scene_id, scene, &entries))
}
