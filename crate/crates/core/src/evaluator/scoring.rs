use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ScoreError {
    #[error("ground truth must be positive, got {0}")]
    InvalidGroundTruth(f64),
}

/// Mean relative accuracy: the fraction of tolerances
/// 0.50, 0.45, ..., 0.05 that strictly exceed the relative error, which
/// matches thresholds θ = 0.50..0.95 tested as `rel < 1 - θ`.
pub fn score_numeric(pred: f64, gt: f64) -> Result<f64, ScoreError> {
    if !(gt > 0.0) || !gt.is_finite() {
        return Err(ScoreError::InvalidGroundTruth(gt));
    }
    if !pred.is_finite() {
        return Ok(0.0);
    }
    let rel = (pred - gt).abs() / gt;
    let hits = (0..10u32)
        .filter(|&i| rel < f64::from(10 - i) / 20.0)
        .count();
    Ok(hits as f64 / 10.0)
}

/// Lowercase, trimmed, with runs of spaces, `_` and `-` folded together.
pub fn normalize_label(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

pub fn score_mcq(pred: &str, gt: &str) -> f64 {
    if normalize_label(pred) == normalize_label(gt) {
        1.0
    } else {
        0.0
    }
}
