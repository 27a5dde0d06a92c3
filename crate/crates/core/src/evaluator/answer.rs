//! Agent answers: a JSON object with `summary`, `evidence` and `data`,
//! possibly surrounded by prose.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAnswer {
    pub summary: String,
    /// Tools invoked, as the agent reports them.
    pub evidence: Value,
    pub data: Map<String, Value>,
}

impl AgentAnswer {
    pub fn answer(&self) -> Option<&Value> {
        self.data.get("answer")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnswerError {
    #[error("MalformedAnswer: {0}")]
    Malformed(String),
}

/// Byte range of the balanced `{...}` starting at `start`, honoring
/// string literals and escapes.
fn balanced_object(text: &str, start: usize) -> Option<&str> {
    let bytes = text.as_bytes();
    let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// First well-formed JSON object in `raw`.
pub fn first_json_object(raw: &str) -> Option<Map<String, Value>> {
    raw.char_indices()
        .filter(|&(_, c)| c == '{')
        .filter_map(|(i, _)| balanced_object(raw, i))
        .find_map(|s| match serde_json::from_str::<Value>(s) {
            Ok(Value::Object(m)) => Some(m),
            _ => None,
        })
}

pub fn parse_agent_answer(raw: &str) -> Result<AgentAnswer, AnswerError> {
    let obj = first_json_object(raw).ok_or_else(|| AnswerError::Malformed("no JSON object found".into()))?;
    for field in ["summary", "evidence", "data"] {
        if !obj.contains_key(field) {
            return Err(AnswerError::Malformed(format!("answer is missing '{field}'")));
        }
    }
    let summary = match &obj["summary"] {
        Value::String(s) => s.clone(),
        _ => return Err(AnswerError::Malformed("'summary' must be a string".into())),
    };
    let data = match &obj["data"] {
        Value::Object(m) => m.clone(),
        _ => return Err(AnswerError::Malformed("'data' must be an object".into())),
    };
    Ok(AgentAnswer {
        summary,
        evidence: obj["evidence"].clone(),
        data,
    })
}
