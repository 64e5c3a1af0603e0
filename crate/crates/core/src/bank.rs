//! Question bank: JSON-lines, one question per line.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::BLANK_MARKER;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSource {
    pub doc: String,
    pub sentence_id: String,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    /// Sentence with the blank shown as `(____)`.
    pub masked_text: String,
    pub target_word: String,
    pub phi: f64,
    pub gini: f64,
    pub rw: f64,
    pub target_rank: usize,
    /// Leading candidates of the prediction, at most five.
    pub top_candidates: Vec<(String, f64)>,
    pub source: QuestionSource,
    pub model_name: String,
    pub created_at: String,
    /// Fields this version does not know about, kept for round trips.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Question {
    pub fn validate(&self) -> Result<(), String> {
        if self.question_id.is_empty() {
            return Err("empty question_id".into());
        }
        for (name, v) in [("phi", self.phi), ("gini", self.gini)] {
            if !(0.0..1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1)"));
            }
        }
        if self.masked_text.matches(BLANK_MARKER).count() != 1 {
            return Err(format!("masked_text must contain exactly one {BLANK_MARKER}"));
        }
        if self.target_word.is_empty() || self.target_word.to_lowercase() != self.target_word {
            return Err(format!("target_word {:?} must be non-empty lowercase", self.target_word));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate question_id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuestionBank {
    pub questions: Vec<Question>,
}

impl QuestionBank {
    pub fn get(&self, question_id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.question_id == question_id)
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }
}

/// Serializes questions to the JSON-lines bank format.
pub fn to_jsonl(questions: &[Question]) -> String {
    let mut out = String::new();
    for q in questions {
        out.push_str(&serde_json::to_string(q).expect("question serializes"));
        out.push('\n');
    }
    out
}

/// Writes the bank to a temporary file next to `path`, then renames it over
/// `path`.
pub fn save_bank(questions: &[Question], path: &Path) -> Result<(), BankError> {
    let io = |source| BankError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(to_jsonl(questions).as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn parse_bank(text: &str, path: &Path) -> Result<QuestionBank, BankError> {
    let mut questions = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(line).map_err(|e| BankError::Malformed {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        q.validate().map_err(|message| BankError::Malformed {
            path: path.to_path_buf(),
            line: lineno,
            message,
        })?;
        if !ids.insert(q.question_id.clone()) {
            return Err(BankError::DuplicateId {
                path: path.to_path_buf(),
                line: lineno,
                id: q.question_id,
            });
        }
        questions.push(q);
    }
    Ok(QuestionBank { questions })
}

pub fn load_bank(path: &Path) -> Result<QuestionBank, BankError> {
    let text = std::fs::read_to_string(path).map_err(|source| BankError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_bank(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    PhiDesc,
    PhiAsc,
    Id,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub min_gap: Option<f64>,
    pub target_word: Option<String>,
    pub limit: Option<usize>,
    pub order: Order,
}

/// Filters and orders questions. Ties in phi fall back to question id.
pub fn select(questions: &[Question], filter: &Selection) -> Vec<Question> {
    let target = filter.target_word.as_ref().map(|t| t.to_lowercase());
    let mut out: Vec<Question> = questions
        .iter()
        .filter(|q| filter.min_gap.is_none_or(|m| q.phi >= m))
        .filter(|q| target.as_ref().is_none_or(|t| &q.target_word == t))
        .cloned()
        .collect();
    match filter.order {
        Order::PhiDesc => out.sort_by(|a, b| {
            b.phi
                .total_cmp(&a.phi)
                .then_with(|| a.question_id.cmp(&b.question_id))
        }),
        Order::PhiAsc => out.sort_by(|a, b| {
            a.phi
                .total_cmp(&b.phi)
                .then_with(|| a.question_id.cmp(&b.question_id))
        }),
        Order::Id => out.sort_by(|a, b| a.question_id.cmp(&b.question_id)),
    }
    if let Some(limit) = filter.limit {
        out.truncate(limit);
    }
    out
}
