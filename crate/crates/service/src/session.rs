//! Quiz session state machine: strict cursor, one attempt without hints or
//! two with a first-letter hint in between.

use clozer_core::bank::Question;
use clozer_core::grading::{grade_attempt, make_hint, GradeResult, Hint};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("insufficient questions: requested {requested}, {available} available")]
    Insufficient { requested: usize, available: usize },
    #[error("n_questions must be at least 1")]
    NoQuestionsRequested,
    #[error("question {got:?} is not the current question (expected {expected:?})")]
    OutOfOrder { got: String, expected: Option<String> },
    #[error("question {0:?} is already finalized")]
    AlreadyFinalized(String),
    #[error("session unfinished; remaining questions: {}", .0.join(", "))]
    Unfinished(Vec<String>),
    #[error("grading failed: {0}")]
    Grading(String),
}

/// Progress on one question of a session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionState {
    pub attempts_used: u8,
    pub hint_issued: bool,
    /// One grade per attempt, in order.
    pub grades: Vec<GradeResult>,
    pub final_grade: Option<GradeResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizSession {
    pub session_id: String,
    pub question_ids: Vec<String>,
    pub cursor: usize,
    pub hint_mode: bool,
    pub min_gap: f64,
    pub seed: u64,
    pub created_at: String,
    pub states: Vec<QuestionState>,
}

/// Result of grading one submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub grade: GradeResult,
    pub hint: Option<Hint>,
    pub finalized: bool,
}

/// Qualifying question ids (phi at least `min_gap`), sorted by id, then
/// shuffled with a ChaCha8 stream seeded by `seed`; the first `n` are kept.
pub fn select_questions(
    bank: &[Question],
    min_gap: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<String>, SessionError> {
    if n == 0 {
        return Err(SessionError::NoQuestionsRequested);
    }
    let mut ids: Vec<String> = bank
        .iter()
        .filter(|q| q.phi >= min_gap)
        .map(|q| q.question_id.clone())
        .collect();
    if ids.len() < n {
        return Err(SessionError::Insufficient {
            requested: n,
            available: ids.len(),
        });
    }
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids.truncate(n);
    Ok(ids)
}

impl QuizSession {
    pub fn new(
        session_id: String,
        question_ids: Vec<String>,
        hint_mode: bool,
        min_gap: f64,
        seed: u64,
        created_at: String,
    ) -> Self {
        let states = vec![QuestionState::default(); question_ids.len()];
        QuizSession {
            session_id,
            question_ids,
            cursor: 0,
            hint_mode,
            min_gap,
            seed,
            created_at,
            states,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.cursor >= self.question_ids.len()
    }

    pub fn current_question(&self) -> Option<&str> {
        self.question_ids.get(self.cursor).map(String::as_str)
    }

    pub fn current_state(&self) -> Option<&QuestionState> {
        self.states.get(self.cursor)
    }

    pub fn max_attempts(&self) -> u8 {
        if self.hint_mode {
            2
        } else {
            1
        }
    }

    /// Grades a submission against `truth` without changing the session.
    pub fn evaluate(
        &self,
        question_id: &str,
        text: &str,
        truth: &str,
    ) -> Result<Submission, SessionError> {
        let current = self.current_question();
        if current != Some(question_id) {
            let done = self.question_ids[..self.cursor.min(self.question_ids.len())]
                .iter()
                .any(|q| q == question_id);
            return Err(if done {
                SessionError::AlreadyFinalized(question_id.to_string())
            } else {
                SessionError::OutOfOrder {
                    got: question_id.to_string(),
                    expected: current.map(str::to_string),
                }
            });
        }
        let state = &self.states[self.cursor];
        let attempt = state.attempts_used + 1;
        let grade = grade_attempt(text, truth, attempt, state.hint_issued)
            .map_err(|e| SessionError::Grading(e.to_string()))?;
        let finalized = grade.exact || attempt >= self.max_attempts();
        let hint = if finalized {
            None
        } else {
            Some(make_hint(truth).map_err(|e| SessionError::Grading(e.to_string()))?)
        };
        Ok(Submission {
            grade,
            hint,
            finalized,
        })
    }

    /// Records a submission produced by [`QuizSession::evaluate`] on the
    /// current state.
    pub fn apply(&mut self, submission: &Submission) {
        let state = &mut self.states[self.cursor];
        state.attempts_used = submission.grade.attempt_number;
        state.grades.push(submission.grade.clone());
        if submission.hint.is_some() {
            state.hint_issued = true;
        }
        if submission.finalized {
            state.final_grade = Some(submission.grade.clone());
            self.cursor += 1;
        }
    }

    pub fn submit(
        &mut self,
        question_id: &str,
        text: &str,
        truth: &str,
    ) -> Result<Submission, SessionError> {
        let s = self.evaluate(question_id, text, truth)?;
        self.apply(&s);
        Ok(s)
    }

    pub fn summary(&self) -> Result<Summary, SessionError> {
        if !self.is_finished() {
            return Err(SessionError::Unfinished(
                self.question_ids[self.cursor..].to_vec(),
            ));
        }
        let mut s = Summary::default();
        for state in &self.states {
            s.add(state);
        }
        Ok(s.finish())
    }
}

/// First-attempt and best-of-two tallies with their percentages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_questions: usize,
    pub exact_first: usize,
    pub stem_first: usize,
    pub exact_best: usize,
    pub stem_best: usize,
    pub exact_ratio: f64,
    pub stem_ratio: f64,
    pub with_hint_exact_ratio: f64,
    pub with_hint_stem_ratio: f64,
}

impl Summary {
    fn add(&mut self, state: &QuestionState) {
        self.n_questions += 1;
        if let Some(first) = state.grades.first() {
            self.exact_first += usize::from(first.exact);
            self.stem_first += usize::from(first.stem);
        }
        self.exact_best += usize::from(state.grades.iter().any(|g| g.exact));
        self.stem_best += usize::from(state.grades.iter().any(|g| g.stem));
    }

    fn finish(mut self) -> Self {
        let pct = |k: usize| {
            if self.n_questions == 0 {
                0.0
            } else {
                100.0 * k as f64 / self.n_questions as f64
            }
        };
        self.exact_ratio = pct(self.exact_first);
        self.stem_ratio = pct(self.stem_first);
        self.with_hint_exact_ratio = pct(self.exact_best);
        self.with_hint_stem_ratio = pct(self.stem_best);
        self
    }

    /// Pools several sessions' tallies into one summary.
    pub fn combine<'a>(parts: impl IntoIterator<Item = &'a Summary>) -> Summary {
        let mut s = Summary::default();
        for p in parts {
            s.n_questions += p.n_questions;
            s.exact_first += p.exact_first;
            s.stem_first += p.stem_first;
            s.exact_best += p.exact_best;
            s.stem_best += p.stem_best;
        }
        s.finish()
    }
}
