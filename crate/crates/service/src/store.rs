//! Sessions and answers persisted as append-only JSON-lines under a data
//! directory. Opening a store replays both logs, re-grading every logged
//! answer, so the in-memory state is always derived from disk.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use clozer_core::analysis::{aggregate, QuestionStats};
use clozer_core::answer_log::{self, AnswerLogRecord, LoggedGrade};
use clozer_core::bank::{Question, QuestionBank};
use serde::{Deserialize, Serialize};

use crate::session::{select_questions, QuizSession, SessionError, Submission, Summary};

pub const SESSIONS_FILE: &str = "sessions.jsonl";
pub const ANSWERS_FILE: &str = "answers.jsonl";

/// One line of `sessions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub question_ids: Vec<String>,
    pub hint_mode: bool,
    pub min_gap: f64,
    pub seed: u64,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionParams {
    pub n_questions: usize,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
    #[serde(default)]
    pub hint_mode: bool,
    /// Drawn at random and recorded when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_min_gap() -> f64 {
    clozer_core::DEFAULT_MIN_GAP
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("io on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{file} line {line}: {message}")]
    Replay {
        file: &'static str,
        line: usize,
        message: String,
    },
}

type Clock = Box<dyn Fn() -> String + Send + Sync>;

struct AnswerSink {
    file: File,
    records: Vec<AnswerLogRecord>,
}

pub struct Store {
    bank: QuestionBank,
    index: HashMap<String, usize>,
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<QuizSession>>>>,
    session_log: Mutex<File>,
    answers: Mutex<AnswerSink>,
    clock: Clock,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> StoreError + '_ {
    move |e| StoreError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Store {
    /// Opens (creating if needed) the data directory and replays its logs
    /// against `bank`.
    pub fn open(bank: QuestionBank, dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let index = bank
            .questions
            .iter()
            .enumerate()
            .map(|(i, q)| (q.question_id.clone(), i))
            .collect();
        let sessions_path = dir.join(SESSIONS_FILE);
        let answers_path = dir.join(ANSWERS_FILE);
        let mut store = Store {
            bank,
            index,
            dir: dir.to_path_buf(),
            sessions: RwLock::new(HashMap::new()),
            session_log: Mutex::new(
                answer_log::open_append(&sessions_path).map_err(|e| StoreError::Io {
                    path: sessions_path.clone(),
                    message: e.to_string(),
                })?,
            ),
            answers: Mutex::new(AnswerSink {
                file: answer_log::open_append(&answers_path).map_err(|e| StoreError::Io {
                    path: answers_path.clone(),
                    message: e.to_string(),
                })?,
                records: Vec::new(),
            }),
            clock: Box::new(now_rfc3339),
        };
        store.replay(&sessions_path, &answers_path)?;
        Ok(store)
    }

    /// Replaces the timestamp source.
    pub fn with_clock(mut self, clock: impl Fn() -> String + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    fn replay(&mut self, sessions_path: &Path, answers_path: &Path) -> Result<(), StoreError> {
        let text = std::fs::read_to_string(sessions_path).map_err(io_err(sessions_path))?;
        let sessions = self.sessions.get_mut().unwrap_or_else(|e| e.into_inner());
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| StoreError::Replay {
                file: SESSIONS_FILE,
                line: i + 1,
                message,
            };
            let rec: SessionRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if let Some(q) = rec.question_ids.iter().find(|q| !self.index.contains_key(*q)) {
                return Err(bad(format!("question {q:?} is not in the bank")));
            }
            if sessions.contains_key(&rec.session_id) {
                return Err(bad(format!("duplicate session {:?}", rec.session_id)));
            }
            let s = QuizSession::new(
                rec.session_id.clone(),
                rec.question_ids,
                rec.hint_mode,
                rec.min_gap,
                rec.seed,
                rec.created_at,
            );
            sessions.insert(rec.session_id, Arc::new(Mutex::new(s)));
        }

        let log = answer_log::read_log(answers_path).map_err(|e| StoreError::Replay {
            file: ANSWERS_FILE,
            line: 0,
            message: e.to_string(),
        })?;
        for (i, rec) in log.iter().enumerate() {
            let bad = |message: String| StoreError::Replay {
                file: ANSWERS_FILE,
                line: i + 1,
                message,
            };
            let session = sessions
                .get(&rec.session_id)
                .ok_or_else(|| bad(format!("unknown session {:?}", rec.session_id)))?;
            let mut session = session.lock().unwrap_or_else(|e| e.into_inner());
            let truth = &self.bank.questions[self.index[&rec.question_id]].target_word;
            let sub = session
                .evaluate(&rec.question_id, &rec.raw_answer, truth)
                .map_err(|e| bad(e.to_string()))?;
            let logged = LoggedGrade {
                exact: sub.grade.exact,
                stem: sub.grade.stem,
            };
            if sub.grade.attempt_number != rec.attempt_number
                || logged != rec.grade
                || sub.grade.used_hint != rec.hint_issued
            {
                return Err(bad("logged grade does not match replayed grade".into()));
            }
            session.apply(&sub);
        }
        self.answers.get_mut().unwrap_or_else(|e| e.into_inner()).records = log;
        Ok(())
    }

    pub fn bank(&self) -> &QuestionBank {
        &self.bank
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    pub fn question(&self, question_id: &str) -> Option<&Question> {
        self.index.get(question_id).map(|&i| &self.bank.questions[i])
    }

    fn handle(&self, session_id: &str) -> Result<Arc<Mutex<QuizSession>>, StoreError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(session_id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSession(session_id.to_string()))
    }

    pub fn create_session(&self, params: &SessionParams) -> Result<QuizSession, StoreError> {
        if !(0.0..1.0).contains(&params.min_gap) {
            return Err(StoreError::InvalidParams(format!(
                "min_gap {} outside [0, 1)",
                params.min_gap
            )));
        }
        let seed = params.seed.unwrap_or_else(rand::random);
        let ids = select_questions(&self.bank.questions, params.min_gap, params.n_questions, seed)?;
        let rec = SessionRecord {
            session_id: uuid::Uuid::new_v4().to_string(),
            question_ids: ids,
            hint_mode: params.hint_mode,
            min_gap: params.min_gap,
            seed,
            created_at: (self.clock)(),
        };
        let session = QuizSession::new(
            rec.session_id.clone(),
            rec.question_ids.clone(),
            rec.hint_mode,
            rec.min_gap,
            rec.seed,
            rec.created_at.clone(),
        );
        {
            let mut log = self.session_log.lock().unwrap_or_else(|e| e.into_inner());
            let path = self.dir.join(SESSIONS_FILE);
            answer_log::append(&mut *log, &rec).map_err(|e| StoreError::Io {
                path,
                message: e.to_string(),
            })?;
        }
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(rec.session_id, Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    /// Snapshot of a session.
    pub fn session(&self, session_id: &str) -> Result<QuizSession, StoreError> {
        let h = self.handle(session_id)?;
        let s = h.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Ok(s)
    }

    /// Sorted ids of all known sessions.
    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Grades, logs, then commits the transition. The session stays locked
    /// throughout, so submissions to one session are serialized.
    pub fn submit_answer(
        &self,
        session_id: &str,
        question_id: &str,
        text: &str,
    ) -> Result<Submission, StoreError> {
        let h = self.handle(session_id)?;
        let mut session = h.lock().unwrap_or_else(|e| e.into_inner());
        let truth = match self.question(question_id) {
            Some(q) => q.target_word.clone(),
            None => {
                return Err(SessionError::OutOfOrder {
                    got: question_id.to_string(),
                    expected: session.current_question().map(str::to_string),
                }
                .into())
            }
        };
        let sub = session.evaluate(question_id, text, &truth)?;
        let rec = AnswerLogRecord {
            session_id: session_id.to_string(),
            question_id: question_id.to_string(),
            attempt_number: sub.grade.attempt_number,
            raw_answer: text.to_string(),
            grade: LoggedGrade {
                exact: sub.grade.exact,
                stem: sub.grade.stem,
            },
            hint_issued: sub.grade.used_hint,
            timestamp: (self.clock)(),
        };
        {
            let mut sink = self.answers.lock().unwrap_or_else(|e| e.into_inner());
            answer_log::append(&mut sink.file, &rec).map_err(|e| StoreError::Io {
                path: self.dir.join(ANSWERS_FILE),
                message: e.to_string(),
            })?;
            sink.records.push(rec);
        }
        session.apply(&sub);
        Ok(sub)
    }

    pub fn summary(&self, session_id: &str) -> Result<Summary, StoreError> {
        Ok(self.session(session_id)?.summary()?)
    }

    /// Pooled summary of every finished session.
    pub fn overall_summary(&self) -> Summary {
        let parts: Vec<Summary> = self
            .session_ids()
            .iter()
            .filter_map(|id| self.summary(id).ok())
            .collect();
        Summary::combine(&parts)
    }

    pub fn answer_log(&self) -> Vec<AnswerLogRecord> {
        self.answers
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .records
            .clone()
    }

    /// First-attempt ratios per bank question over every logged answer.
    pub fn question_stats(&self) -> Vec<QuestionStats> {
        aggregate(&self.bank.questions, &self.answer_log())
            .expect("replay guarantees every logged question is in the bank")
    }
}
