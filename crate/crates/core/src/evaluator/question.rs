use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Difficulty;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    ObjectCount,
    AbsoluteDistance,
    ObjectSize,
    RoomSize,
    RelativeDistance,
    RelativeDirection,
}

impl QuestionType {
    /// Report order.
    pub const ALL: [QuestionType; 6] = [
        QuestionType::ObjectCount,
        QuestionType::AbsoluteDistance,
        QuestionType::ObjectSize,
        QuestionType::RoomSize,
        QuestionType::RelativeDistance,
        QuestionType::RelativeDirection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::ObjectCount => "object_count",
            QuestionType::AbsoluteDistance => "absolute_distance",
            QuestionType::ObjectSize => "object_size",
            QuestionType::RoomSize => "room_size",
            QuestionType::RelativeDistance => "relative_distance",
            QuestionType::RelativeDirection => "relative_direction",
        }
    }

    pub fn is_multiple_choice(self) -> bool {
        matches!(self, QuestionType::RelativeDistance | QuestionType::RelativeDirection)
    }

    pub fn unit(self) -> Option<Unit> {
        match self {
            QuestionType::AbsoluteDistance => Some(Unit::M),
            QuestionType::ObjectSize => Some(Unit::Cm),
            QuestionType::RoomSize => Some(Unit::M2),
            _ => None,
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        QuestionType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| format!("unknown question type '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    M,
    Cm,
    M2,
}

/// A number for numeric types, an option label for multiple choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Number(f64),
    Label(String),
}

impl Answer {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Answer::Number(x) => Some(*x),
            Answer::Label(s) => s.trim().parse().ok(),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Number(x) => write!(f, "{x}"),
            Answer::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub qid: String,
    pub scene_id: String,
    pub qtype: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    pub ground_truth: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
}

impl Question {
    /// Options iff multiple choice; difficulty iff relative direction;
    /// numeric ground truth iff not multiple choice.
    pub fn check(&self) -> Result<(), String> {
        let mcq = self.qtype.is_multiple_choice();
        if mcq != self.options.is_some() {
            return Err(format!("{}: options must be present exactly for multiple-choice types", self.qid));
        }
        if (self.qtype == QuestionType::RelativeDirection) != self.difficulty.is_some() {
            return Err(format!("{}: difficulty must be present exactly for relative_direction", self.qid));
        }
        match (&self.ground_truth, mcq) {
            (Answer::Label(l), true) => {
                if !self.options.as_ref().is_some_and(|o| o.contains(l)) {
                    return Err(format!("{}: ground truth '{l}' is not among the options", self.qid));
                }
            }
            (Answer::Number(x), false) => {
                if !(x.is_finite() && *x > 0.0) {
                    return Err(format!("{}: numeric ground truth must be positive", self.qid));
                }
            }
            _ => return Err(format!("{}: ground truth kind does not match the question type", self.qid)),
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum QuestionFileError {
    #[error("cannot read questions: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

pub fn parse_questions(text: &str) -> Result<Vec<Question>, QuestionFileError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(line).map_err(|e| QuestionFileError::Invalid {
            line: i + 1,
            message: e.to_string(),
        })?;
        q.check().map_err(|message| QuestionFileError::Invalid { line: i + 1, message })?;
        out.push(q);
    }
    Ok(out)
}

pub fn load_questions(path: &Path) -> Result<Vec<Question>, QuestionFileError> {
    parse_questions(&fs::read_to_string(path)?)
}

pub fn write_questions<W: Write>(mut out: W, questions: &[Question]) -> io::Result<()> {
    for q in questions {
        serde_json::to_writer(&mut out, q)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
