//! Append-only answer log (JSON-lines).

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedGrade {
    pub exact: bool,
    pub stem: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerLogRecord {
    pub session_id: String,
    pub question_id: String,
    pub attempt_number: u8,
    pub raw_answer: String,
    pub grade: LoggedGrade,
    pub hint_issued: bool,
    pub timestamp: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("answer log io: {0}")]
    Io(#[from] std::io::Error),
    #[error("answer log line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub fn parse_log(text: &str) -> Result<Vec<AnswerLogRecord>, LogError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnswerLogRecord =
            serde_json::from_str(line).map_err(|e| LogError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if !matches!(rec.attempt_number, 1 | 2) {
            return Err(LogError::Malformed {
                line: idx + 1,
                message: format!("attempt_number {} not in {{1, 2}}", rec.attempt_number),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// Reads a log file; a missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<AnswerLogRecord>, LogError> {
    match std::fs::read_to_string(path) {
        Ok(text) => parse_log(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn open_append(path: &Path) -> Result<File, LogError> {
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

/// Appends one record as a single line and flushes it.
pub fn append<W: Write, T: Serialize>(out: &mut W, record: &T) -> Result<(), LogError> {
    let mut line = serde_json::to_string(record).map_err(|e| LogError::Malformed {
        line: 0,
        message: e.to_string(),
    })?;
    line.push('\n');
    out.write_all(line.as_bytes())?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(q: &str, attempt: u8) -> AnswerLogRecord {
        AnswerLogRecord {
            session_id: "s".into(),
            question_id: q.into(),
            attempt_number: attempt,
            raw_answer: "x".into(),
            grade: LoggedGrade { exact: false, stem: false },
            hint_issued: attempt == 2,
            timestamp: "2024-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn append_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("answers.jsonl");
        assert!(read_log(&path).unwrap().is_empty());
        let mut f = open_append(&path).unwrap();
        append(&mut f, &rec("a", 1)).unwrap();
        append(&mut f, &rec("a", 2)).unwrap();
        drop(f);
        let mut f = open_append(&path).unwrap();
        append(&mut f, &rec("b", 1)).unwrap();
        let log = read_log(&path).unwrap();
        assert_eq!(log, vec![rec("a", 1), rec("a", 2), rec("b", 1)]);
    }

    #[test]
    fn rejects_bad_attempt() {
        let mut r = rec("a", 1);
        r.attempt_number = 3;
        let text = serde_json::to_string(&r).unwrap();
        assert!(matches!(parse_log(&text), Err(LogError::Malformed { line: 1, .. })));
    }
}
