//! Masked-word predictors.
//!
//! A backend takes a masked sentence and returns candidate words with
//! confidences sorted in descending order. Two implementations exist: a
//! tabular backend that replays stored predictions (deterministic, used for
//! tests and offline runs) and an HTTP client for an external inference
//! server.

mod remote;
mod tabular;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::text::MaskedSentence;

pub use remote::{RemoteBackend, RemoteConfig};
pub use tabular::{TabularBackend, TabularRow};

/// Allowed slack on the descending-order check for remote responses.
pub const SORT_TOLERANCE: f64 = 1e-9;
/// Allowed slack on the confidence sum.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub word: String,
    pub confidence: f64,
}

impl Candidate {
    pub fn new(word: impl Into<String>, confidence: f64) -> Self {
        Candidate {
            word: word.into(),
            confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("prediction has no candidates")]
    Empty,
    #[error("confidence of candidate {index} is not a finite number in (0, 1]: {value}")]
    ConfidenceOutOfRange { index: usize, value: f64 },
    #[error("candidates not sorted in descending order at rank {rank}")]
    Unsorted { rank: usize },
    #[error("confidences sum to {sum}, above 1")]
    SumExceedsOne { sum: f64 },
    #[error("candidate word {0:?} appears more than once")]
    DuplicateWord(String),
}

/// Candidate words for one masked position, confidence descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPrediction {
    candidates: Vec<Candidate>,
}

impl MaskPrediction {
    /// Accepts candidates that already satisfy every invariant.
    pub fn new(candidates: Vec<Candidate>) -> Result<Self, ValidationError> {
        validate(&candidates)?;
        Ok(MaskPrediction { candidates })
    }

    /// Stable-sorts by descending confidence, then validates.
    pub fn from_unsorted(mut candidates: Vec<Candidate>) -> Result<Self, ValidationError> {
        check_confidences(&candidates)?;
        candidates.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
        Self::new(candidates)
    }

    /// Accepts inversions no larger than `tolerance` (float noise from the
    /// server) and orders them; larger inversions are an error.
    pub fn from_nearly_sorted(
        candidates: Vec<Candidate>,
        tolerance: f64,
    ) -> Result<Self, ValidationError> {
        check_confidences(&candidates)?;
        if let Some(rank) = candidates
            .windows(2)
            .position(|w| w[1].confidence > w[0].confidence + tolerance)
        {
            return Err(ValidationError::Unsorted { rank: rank + 2 });
        }
        Self::from_unsorted(candidates)
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    /// Number of candidates actually returned (the truncation size M).
    pub fn truncation_m(&self) -> usize {
        self.candidates.len()
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.confidence).collect()
    }

    /// 1-based rank of the first candidate equal to `word`, ignoring case and
    /// surrounding whitespace.
    pub fn rank_of(&self, word: &str) -> Option<usize> {
        let word = word.trim().to_lowercase();
        self.candidates
            .iter()
            .position(|c| c.word.trim().to_lowercase() == word)
            .map(|i| i + 1)
    }
}

fn check_confidences(candidates: &[Candidate]) -> Result<(), ValidationError> {
    if candidates.is_empty() {
        return Err(ValidationError::Empty);
    }
    for (index, c) in candidates.iter().enumerate() {
        if !(c.confidence.is_finite() && c.confidence > 0.0 && c.confidence <= 1.0) {
            return Err(ValidationError::ConfidenceOutOfRange {
                index,
                value: c.confidence,
            });
        }
    }
    Ok(())
}

fn validate(candidates: &[Candidate]) -> Result<(), ValidationError> {
    check_confidences(candidates)?;
    if let Some(rank) = candidates
        .windows(2)
        .position(|w| w[1].confidence > w[0].confidence)
    {
        return Err(ValidationError::Unsorted { rank: rank + 2 });
    }
    let sum: f64 = candidates.iter().map(|c| c.confidence).sum();
    if sum > 1.0 + SUM_TOLERANCE {
        return Err(ValidationError::SumExceedsOne { sum });
    }
    let mut seen = HashSet::new();
    for c in candidates {
        if !seen.insert(c.word.as_str()) {
            return Err(ValidationError::DuplicateWord(c.word.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Tabular,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    /// Base URL of the inference server (remote only).
    pub endpoint: Option<String>,
    /// Prediction table (tabular only).
    pub table: Option<PathBuf>,
    pub model_name: String,
    /// Mask token the model expects; replaces the placeholder before dispatch.
    pub mask_token: String,
    /// Number of candidates requested per prediction.
    pub top_m: usize,
}

impl BackendDescriptor {
    pub const DEFAULT_TOP_M: usize = 50;

    pub fn tabular(table: impl Into<PathBuf>, model_name: impl Into<String>) -> Self {
        BackendDescriptor {
            kind: BackendKind::Tabular,
            endpoint: None,
            table: Some(table.into()),
            model_name: model_name.into(),
            mask_token: "[MASK]".into(),
            top_m: Self::DEFAULT_TOP_M,
        }
    }

    pub fn remote(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        BackendDescriptor {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            table: None,
            model_name: model_name.into(),
            mask_token: "[MASK]".into(),
            top_m: Self::DEFAULT_TOP_M,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.top_m < 2 {
            return Err(BackendError::Config(format!(
                "top_m must be at least 2, got {}",
                self.top_m
            )));
        }
        if self.mask_token.is_empty() {
            return Err(BackendError::Config("mask token is empty".into()));
        }
        match self.kind {
            BackendKind::Tabular if self.table.is_none() => {
                Err(BackendError::Config("tabular backend needs a table path".into()))
            }
            BackendKind::Remote if self.endpoint.is_none() => {
                Err(BackendError::Config("remote backend needs an endpoint".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("no prediction row for {0:?}")]
    NoPredictionRow(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid prediction: {0}")]
    Validation(#[from] ValidationError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_transport(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

/// A masked language model seen as a function from masked sentence to
/// ranked candidates. Implementations must be callable from many threads.
pub trait MaskPredictor: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    fn predict(&self, masked: &MaskedSentence) -> Result<MaskPrediction, BackendError>;

    /// Whether `word` is a single token in the model vocabulary.
    fn in_vocab(&self, word: &str) -> Result<bool, BackendError>;

    /// Element-wise `predict`, same order as the input. Failures stay per
    /// item.
    fn predict_batch(
        &self,
        items: &[MaskedSentence],
    ) -> Vec<Result<MaskPrediction, BackendError>> {
        par::map(items, |m| self.predict(m))
    }
}

/// Checks the single-placeholder precondition and returns the text to send
/// with the backend's mask token in place of the placeholder.
pub fn dispatch_text(masked: &MaskedSentence, mask_token: &str) -> Result<String, BackendError> {
    let count = masked.masked_text.matches(&masked.placeholder).count();
    if masked.placeholder.is_empty() || count != 1 {
        return Err(BackendError::Input(format!(
            "sentence {} must contain exactly one placeholder, found {count}",
            masked.sentence_id
        )));
    }
    Ok(masked.with_mask_token(mask_token))
}

/// Builds the backend a descriptor names.
pub fn open_backend(desc: &BackendDescriptor) -> Result<Box<dyn MaskPredictor>, BackendError> {
    desc.validate()?;
    Ok(match desc.kind {
        BackendKind::Tabular => Box::new(TabularBackend::load(desc.clone())?),
        BackendKind::Remote => Box::new(RemoteBackend::new(desc.clone(), RemoteConfig::default())?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(w: &str, p: f64) -> Candidate {
        Candidate::new(w, p)
    }

    #[test]
    fn accepts_valid() {
        let p = MaskPrediction::new(vec![c("peace", 0.8), c("piece", 0.1), c("state", 0.05)]).unwrap();
        assert_eq!(p.truncation_m(), 3);
        assert_eq!(p.rank_of("Peace"), Some(1));
        assert_eq!(p.rank_of("state"), Some(3));
        assert_eq!(p.rank_of("zzzz"), None);
    }

    #[test]
    fn rejects_each_violation() {
        assert_eq!(MaskPrediction::new(vec![]), Err(ValidationError::Empty));
        assert!(matches!(
            MaskPrediction::new(vec![c("a", 0.5), c("b", -0.1)]),
            Err(ValidationError::ConfidenceOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            MaskPrediction::new(vec![c("a", f64::NAN)]),
            Err(ValidationError::ConfidenceOutOfRange { .. })
        ));
        assert_eq!(
            MaskPrediction::new(vec![c("a", 0.1), c("b", 0.9)]),
            Err(ValidationError::Unsorted { rank: 2 })
        );
        assert!(matches!(
            MaskPrediction::new(vec![c("a", 0.7), c("b", 0.6)]),
            Err(ValidationError::SumExceedsOne { .. })
        ));
        assert_eq!(
            MaskPrediction::new(vec![c("a", 0.5), c("a", 0.2)]),
            Err(ValidationError::DuplicateWord("a".into()))
        );
    }

    #[test]
    fn unsorted_rows_are_resorted() {
        let p = MaskPrediction::from_unsorted(vec![c("a", 0.1), c("b", 0.9)]).unwrap();
        assert_eq!(p.candidates(), &[c("b", 0.9), c("a", 0.1)]);
    }

    #[test]
    fn nearly_sorted_tolerance() {
        let p = MaskPrediction::from_nearly_sorted(vec![c("a", 0.3), c("b", 0.3 + 1e-12)], SORT_TOLERANCE)
            .unwrap();
        assert_eq!(p.candidates()[0].word, "b");
        assert_eq!(
            MaskPrediction::from_nearly_sorted(vec![c("a", 0.3), c("b", 0.31)], SORT_TOLERANCE),
            Err(ValidationError::Unsorted { rank: 2 })
        );
    }

    #[test]
    fn descriptor_checks() {
        let mut d = BackendDescriptor::tabular("x.jsonl", "m");
        assert!(d.validate().is_ok());
        d.top_m = 1;
        assert!(d.validate().is_err());
        let mut r = BackendDescriptor::remote("http://localhost:1", "m");
        r.endpoint = None;
        assert!(r.validate().is_err());
    }
}
