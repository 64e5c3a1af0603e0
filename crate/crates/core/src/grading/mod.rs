//! Answer grading: exact match and stem match, case-insensitive, plus the
//! first-letter hint.

mod stem;

use serde::{Deserialize, Serialize};

pub use stem::stem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeResult {
    pub exact: bool,
    pub stem: bool,
    pub normalized_answer: String,
    pub normalized_truth: String,
    pub used_hint: bool,
    /// 1 or 2.
    pub attempt_number: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintKind {
    FirstLetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub kind: HintKind,
    pub value: char,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GradingError {
    #[error("ground truth is empty")]
    EmptyTruth,
    #[error("no grades to score")]
    NoGrades,
}

/// Trim and lowercase. Hyphens and apostrophes survive.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Grades a first attempt without hint.
pub fn grade(answer: &str, truth: &str) -> Result<GradeResult, GradingError> {
    grade_attempt(answer, truth, 1, false)
}

pub fn grade_attempt(
    answer: &str,
    truth: &str,
    attempt_number: u8,
    used_hint: bool,
) -> Result<GradeResult, GradingError> {
    let normalized_truth = normalize(truth);
    if normalized_truth.is_empty() {
        return Err(GradingError::EmptyTruth);
    }
    let normalized_answer = normalize(answer);
    // One blank holds one word.
    let gradable = !normalized_answer.is_empty() && !normalized_answer.contains(char::is_whitespace);
    let exact = gradable && normalized_answer == normalized_truth;
    let stem_match = gradable && stem(&normalized_answer) == stem(&normalized_truth);
    Ok(GradeResult {
        exact,
        stem: stem_match,
        normalized_answer,
        normalized_truth,
        used_hint,
        attempt_number,
    })
}

pub fn make_hint(truth: &str) -> Result<Hint, GradingError> {
    let first = truth
        .trim()
        .chars()
        .next()
        .ok_or(GradingError::EmptyTruth)?;
    Ok(Hint {
        kind: HintKind::FirstLetter,
        value: first.to_lowercase().next().unwrap_or(first),
    })
}

/// Percent of grades with an exact match and with a stem match.
pub fn session_score(grades: &[GradeResult]) -> Result<(f64, f64), GradingError> {
    if grades.is_empty() {
        return Err(GradingError::NoGrades);
    }
    let n = grades.len() as f64;
    let exact = grades.iter().filter(|g| g.exact).count() as f64;
    let stem = grades.iter().filter(|g| g.stem).count() as f64;
    Ok((100.0 * exact / n, 100.0 * stem / n))
}
