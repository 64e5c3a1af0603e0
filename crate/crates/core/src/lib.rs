//! Open cloze question generation.
//!
//! Candidate sentences containing a target word are pulled from a corpus,
//! masked, scored by a masked language model backend and ranked by the gap
//! score: the Gini coefficient of the confidence tail starting at the target
//! rank, scaled by the target's share of the top-k confidences. High scores
//! mark blanks that admit only the target word.
//!
//! The crate also carries the delivery-side pieces that do not need a server:
//! the question bank format, answer grading (exact and stem match), the answer
//! log record, and correlation analysis.

pub mod analysis;
pub mod answer_log;
pub mod bank;
pub mod gap;
pub mod grading;
pub mod mlm;
mod par;
pub mod pipeline;
pub mod text;

pub use analysis::{aggregate, pearson, QuestionStats};
pub use answer_log::AnswerLogRecord;
pub use bank::{load_bank, save_bank, Question, QuestionBank};
pub use gap::{gap_score, gini, lorenz, rank, reweight, ConfidenceVector, GapScoreResult};
pub use grading::{grade, make_hint, session_score, stem, GradeResult, Hint};
pub use mlm::{BackendDescriptor, MaskPrediction, MaskPredictor};
pub use pipeline::{run_generation, GenerationJob, GenerationReport};
pub use text::{ExtractionConfig, MaskedSentence, SentenceRecord, WordList};

/// Display marker for the blank in persisted questions.
pub const BLANK_MARKER: &str = "(____)";

/// Default gap threshold for selecting questions.
pub const DEFAULT_MIN_GAP: f64 = 0.80;

/// Default number of leading confidences in the reweighting denominator.
pub const DEFAULT_TOP_K: usize = 2;
