//! Evaluation harness for the six static spatial question types.

mod answer;
mod external;
mod generate;
mod question;
mod scoring;
mod scripted;
pub mod templates;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use answer::{first_json_object, parse_agent_answer, AgentAnswer, AnswerError};
pub use external::{serve_answer_endpoint, EndpointAgent, DEFAULT_TIMEOUT};
pub use generate::{generate_questions, MARGIN, MIN_DISTANCE_M, MIN_SEPARATION_M};
pub use question::{load_questions, parse_questions, write_questions, Answer, Question, QuestionFileError, QuestionType, Unit};
pub use scoring::{normalize_label, score_mcq, score_numeric, ScoreError};
pub use scripted::ScriptedAgent;

use crate::geometry::Difficulty;
use crate::scene_graph::SceneGraph;
use crate::tool_server::{write_trace_file, SceneStore, TraceEntry, TraceHeader};

/// What an agent hands back for one question.
#[derive(Debug, Clone, Default)]
pub struct AgentOutcome {
    /// Raw final message, expected to contain the three-field answer object.
    pub raw: Option<String>,
    pub trace: Vec<TraceEntry>,
    /// Failure before any answer was produced, prefixed with an error kind.
    pub error: Option<String>,
}

pub trait Agent: Sync {
    fn name(&self) -> String;
    fn answer(&self, question: &Question, scene: Arc<SceneGraph>) -> AgentOutcome;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredAnswer {
    pub qid: String,
    pub qtype: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    pub predicted: Option<Answer>,
    pub ground_truth: Answer,
    pub score: f64,
    pub tool_calls: usize,
    pub trace_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    pub n: usize,
    pub mean_score: f64,
    pub mean_tools: f64,
    pub median_tools: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyRow {
    pub difficulty: Difficulty,
    pub n: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub agent: String,
    pub seed: u64,
    pub n_questions: usize,
    pub rows: Vec<TypeRow>,
    pub direction_by_difficulty: Vec<DifficultyRow>,
    /// Unweighted mean of the per-type means; `None` for an empty run.
    pub overall_average: Option<f64>,
    pub answers: Vec<ScoredAnswer>,
}

impl Report {
    pub fn row(&self, qtype: QuestionType) -> Option<&TypeRow> {
        self.rows.iter().find(|r| r.qtype == qtype)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Restricts the run to these types; empty means all.
    pub types: Vec<QuestionType>,
    /// Directory receiving `traces/<qid>.jsonl`.
    pub output_dir: Option<PathBuf>,
}

/// File-name-safe form of a question id.
pub fn trace_file_name(qid: &str) -> String {
    let safe: String = qid
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    format!("traces/{safe}.jsonl")
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Scores a final answer against the question's ground truth.
pub fn score_answer(q: &Question, raw: &str) -> (Option<Answer>, f64, Option<String>) {
    let parsed = match parse_agent_answer(raw) {
        Ok(a) => a,
        Err(e) => return (None, 0.0, Some(e.to_string())),
    };
    let predicted = match parsed.answer() {
        Some(Value::Number(n)) => n.as_f64().map(Answer::Number),
        Some(Value::String(s)) => Some(Answer::Label(s.clone())),
        _ => None,
    };
    let Some(predicted) = predicted else {
        return (None, 0.0, Some("MalformedAnswer: 'data.answer' must be a number or a string".into()));
    };
    match (&q.ground_truth, q.qtype.is_multiple_choice()) {
        (Answer::Label(gt), true) => {
            let s = score_mcq(&predicted.to_string(), gt);
            (Some(predicted), s, None)
        }
        (Answer::Number(gt), false) => match predicted.as_f64() {
            Some(p) => match score_numeric(p, *gt) {
                Ok(s) => (Some(predicted), s, None),
                Err(e) => (Some(predicted), 0.0, Some(format!("InvalidGroundTruth: {e}"))),
            },
            None => (Some(predicted), 0.0, Some("MalformedAnswer: expected a numeric answer".into())),
        },
        _ => (Some(predicted), 0.0, Some("InvalidGroundTruth: answer kind does not match the type".into())),
    }
}

fn evaluate_one(q: &Question, store: &SceneStore, agent: &dyn Agent, out: Option<&Path>) -> ScoredAnswer {
    let trace_ref = trace_file_name(&q.qid);
    let mut scored = ScoredAnswer {
        qid: q.qid.clone(),
        qtype: q.qtype,
        difficulty: q.difficulty,
        predicted: None,
        ground_truth: q.ground_truth.clone(),
        score: 0.0,
        tool_calls: 0,
        trace_ref: trace_ref.clone(),
        error: None,
    };
    let scene = match store.get(&q.scene_id) {
        Ok(s) => s,
        Err(e) => {
            scored.error = Some(format!("SceneLoad: {e}"));
            return scored;
        }
    };
    let outcome = agent.answer(q, scene);
    scored.tool_calls = outcome.trace.len();
    if let Some(dir) = out {
        let header = TraceHeader {
            session_id: q.qid.clone(),
            scene_id: q.scene_id.clone(),
        };
        if let Err(e) = write_trace_file(&dir.join(&trace_ref), &header, &outcome.trace) {
            log::warn!("cannot persist trace for {}: {e}", q.qid);
        }
    }
    match (outcome.error, outcome.raw) {
        (Some(e), _) => scored.error = Some(e),
        (None, None) => scored.error = Some("MalformedAnswer: agent returned nothing".into()),
        (None, Some(raw)) => {
            let (predicted, score, error) = score_answer(q, &raw);
            scored.predicted = predicted;
            scored.score = score;
            scored.error = error;
        }
    }
    scored
}

/// Evaluates every question, in parallel with one session each, and
/// aggregates a per-type report. Single-question failures score 0.
pub fn run_benchmark(questions: &[Question], store: &SceneStore, agent: &dyn Agent, opts: &RunOptions) -> io::Result<Report> {
    let selected: Vec<&Question> = questions
        .iter()
        .filter(|q| opts.types.is_empty() || opts.types.contains(&q.qtype))
        .collect();
    if let Some(dir) = &opts.output_dir {
        fs::create_dir_all(dir.join("traces"))?;
    }
    let out = opts.output_dir.as_deref();
    let answers: Vec<ScoredAnswer> = selected.par_iter().map(|q| evaluate_one(q, store, agent, out)).collect();
    Ok(aggregate(agent.name(), opts.seed, answers))
}

pub fn aggregate(agent: String, seed: u64, answers: Vec<ScoredAnswer>) -> Report {
    let mut by_type: BTreeMap<QuestionType, Vec<&ScoredAnswer>> = BTreeMap::new();
    let mut by_difficulty: BTreeMap<Difficulty, Vec<f64>> = BTreeMap::new();
    for a in &answers {
        by_type.entry(a.qtype).or_default().push(a);
        if let (QuestionType::RelativeDirection, Some(d)) = (a.qtype, a.difficulty) {
            by_difficulty.entry(d).or_default().push(a.score);
        }
    }
    let rows: Vec<TypeRow> = QuestionType::ALL
        .into_iter()
        .filter_map(|t| {
            let xs = by_type.get(&t)?;
            Some(TypeRow {
                qtype: t,
                n: xs.len(),
                mean_score: mean(xs.iter().map(|a| a.score)),
                mean_tools: mean(xs.iter().map(|a| a.tool_calls as f64)),
                median_tools: median(xs.iter().map(|a| a.tool_calls as f64).collect()),
            })
        })
        .collect();
    let direction_by_difficulty = Difficulty::ALL
        .into_iter()
        .filter_map(|d| {
            let xs = by_difficulty.get(&d)?;
            Some(DifficultyRow {
                difficulty: d,
                n: xs.len(),
                mean_score: mean(xs.iter().copied()),
            })
        })
        .collect();
    let overall_average = (!rows.is_empty()).then(|| mean(rows.iter().map(|r| r.mean_score)));
    Report {
        agent,
        seed,
        n_questions: answers.len(),
        rows,
        direction_by_difficulty,
        overall_average,
        answers,
    }
}
