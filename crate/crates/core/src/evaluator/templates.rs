//! Fixed English phrasings per question type, and the inverse parser the
//! scripted agent uses to pull entity names back out.

use std::sync::OnceLock;

use regex::Regex;

use super::QuestionType;
use crate::geometry::Difficulty;

/// Entity names mentioned by a question, as written in its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entities {
    Count { object: String },
    Size { object: String },
    Distance { a: String, b: String },
    Room,
    Closest { anchor: String, candidates: Vec<String> },
    Direction { standing: String, facing: String, target: String },
}

pub fn object_count(object: &str) -> String {
    format!("How many {object}(s) are in this room?")
}

pub fn object_size(object: &str) -> String {
    format!("What is the length of the longest dimension (length, width, or height) of the {object}, measured in centimeters?")
}

pub fn absolute_distance(a: &str, b: &str) -> String {
    format!("Measuring from the closest point of each object, what is the direct distance between the {a} and the {b} (in meters)?")
}

pub fn room_size() -> String {
    "What is the size of this room (in square meters)?".to_string()
}

pub fn relative_distance(anchor: &str, candidates: &[String]) -> String {
    format!(
        "Measuring from the closest point of each object, which of these objects ({}) is the closest to the {anchor}?",
        candidates.join(", ")
    )
}

pub fn relative_direction(standing: &str, facing: &str, target: &str, difficulty: Difficulty) -> String {
    let choices = match difficulty {
        Difficulty::Easy => "left or right",
        Difficulty::Medium => "left, right, or back",
        Difficulty::Hard => "front-left, front-right, back-left, or back-right",
    };
    format!("If I am standing by the {standing} and facing the {facing}, is the {target} to my {choices}?")
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("template pattern compiles"))
}

pub fn parse(qtype: QuestionType, text: &str) -> Option<Entities> {
    static COUNT: OnceLock<Regex> = OnceLock::new();
    static SIZE: OnceLock<Regex> = OnceLock::new();
    static DIST: OnceLock<Regex> = OnceLock::new();
    static ROOM: OnceLock<Regex> = OnceLock::new();
    static CLOSEST: OnceLock<Regex> = OnceLock::new();
    static DIRECTION: OnceLock<Regex> = OnceLock::new();
    let text = text.trim();
    match qtype {
        QuestionType::ObjectCount => {
            let c = re(&COUNT, r"^How many (.+?)(?:\(s\))? are in this room\?$").captures(text)?;
            Some(Entities::Count { object: c[1].to_string() })
        }
        QuestionType::ObjectSize => {
            let c = re(&SIZE, r"longest dimension \(length, width, or height\) of the (.+?), measured in centimeters\?$")
                .captures(text)?;
            Some(Entities::Size { object: c[1].to_string() })
        }
        QuestionType::AbsoluteDistance => {
            let c = re(&DIST, r"distance between the (.+?) and the (.+?) \(in meters\)\?$").captures(text)?;
            Some(Entities::Distance {
                a: c[1].to_string(),
                b: c[2].to_string(),
            })
        }
        QuestionType::RoomSize => re(&ROOM, r"^What is the size of this room\b").is_match(text).then_some(Entities::Room),
        QuestionType::RelativeDistance => {
            let c = re(&CLOSEST, r"which of these objects \((.+?)\) is the closest to the (.+?)\?$").captures(text)?;
            Some(Entities::Closest {
                anchor: c[2].to_string(),
                candidates: c[1].split(", ").map(str::to_string).collect(),
            })
        }
        QuestionType::RelativeDirection => {
            let c = re(&DIRECTION, r"^If I am standing by the (.+?) and facing the (.+?), is the (.+?) to my .+\?$")
                .captures(text)?;
            Some(Entities::Direction {
                standing: c[1].to_string(),
                facing: c[2].to_string(),
                target: c[3].to_string(),
            })
        }
    }
}
