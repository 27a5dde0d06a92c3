//! Free-text class resolution against the classes present in a scene.

use serde::Serialize;

use crate::classes::{normalize_term, synonym_of};

/// Minimum similarity for a query to resolve to a class.
pub const ACCEPT_THRESHOLD: f64 = 0.6;
const MAX_CANDIDATES: usize = 5;
/// Score for a query that equals one word of a multi-word class.
const TOKEN_MATCH_SCORE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCandidate {
    pub class: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassResolution {
    pub query: String,
    /// Best class when its score clears [`ACCEPT_THRESHOLD`].
    pub resolved_class: Option<String>,
    pub score: f64,
    pub candidates: Vec<ClassCandidate>,
}

fn strip_article(s: &str) -> &str {
    for a in ["the_", "a_", "an_"] {
        if let Some(rest) = s.strip_prefix(a) {
            if !rest.is_empty() {
                return rest;
            }
        }
    }
    s
}

/// The term itself plus plausible singular forms.
fn variants(term: &str) -> Vec<String> {
    let mut out = vec![term.to_string()];
    let mut push = |s: String| {
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(stem) = term.strip_suffix("ies") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = term.strip_suffix("es") {
        push(stem.to_string());
    }
    if let Some(stem) = term.strip_suffix('s') {
        if !stem.ends_with('s') {
            push(stem.to_string());
        }
    }
    out
}

pub fn similarity(query: &str, class: &str) -> f64 {
    let q = normalize_term(query);
    let q = strip_article(&q);
    let forms = variants(q);
    if forms.iter().any(|v| v == class || synonym_of(v) == Some(class)) {
        return 1.0;
    }
    let edit = forms
        .iter()
        .map(|v| strsim::normalized_levenshtein(v, class))
        .fold(0.0, f64::max);
    let token = if class.contains('_') && class.split('_').any(|t| forms.iter().any(|v| v == t)) {
        TOKEN_MATCH_SCORE
    } else {
        0.0
    };
    edit.max(token)
}

/// Scores `query` against `classes` and keeps the best few.
pub fn resolve_class<'a>(query: &str, classes: impl IntoIterator<Item = &'a str>) -> ClassResolution {
    let mut ranked: Vec<ClassCandidate> = classes
        .into_iter()
        .map(|c| ClassCandidate {
            class: c.to_string(),
            score: similarity(query, c),
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.class.cmp(&b.class)));
    ranked.truncate(MAX_CANDIDATES);
    let best = ranked.first().filter(|c| c.score >= ACCEPT_THRESHOLD);
    ClassResolution {
        query: query.to_string(),
        resolved_class: best.map(|c| c.class.clone()),
        score: best.map_or(0.0, |c| c.score),
        candidates: ranked,
    }
}
