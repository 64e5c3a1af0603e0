//! Per-question correct ratios and their correlation with the gap score.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::answer_log::AnswerLogRecord;
use crate::bank::Question;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStats {
    pub question_id: String,
    pub n_answers: usize,
    pub exact_ratio: f64,
    pub stem_ratio: f64,
    pub phi: f64,
    /// Set when the question has no answers; its ratios are 0 by convention.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("answer for unknown question {0:?}")]
    DanglingQuestion(String),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Exact,
    Stem,
}

/// First-attempt ratios per bank question, in bank order. Second attempts
/// (hint-assisted) are left out.
pub fn aggregate(
    bank: &[Question],
    log: &[AnswerLogRecord],
) -> Result<Vec<QuestionStats>, AnalysisError> {
    let mut tally: HashMap<&str, (usize, usize, usize)> = bank
        .iter()
        .map(|q| (q.question_id.as_str(), (0, 0, 0)))
        .collect();
    for rec in log {
        let t = tally
            .get_mut(rec.question_id.as_str())
            .ok_or_else(|| AnalysisError::DanglingQuestion(rec.question_id.clone()))?;
        if rec.attempt_number != 1 {
            continue;
        }
        t.0 += 1;
        t.1 += usize::from(rec.grade.exact);
        t.2 += usize::from(rec.grade.stem);
    }
    Ok(bank
        .iter()
        .map(|q| {
            let (n, exact, stem) = tally[q.question_id.as_str()];
            let pct = |k: usize| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
            QuestionStats {
                question_id: q.question_id.clone(),
                n_answers: n,
                exact_ratio: pct(exact),
                stem_ratio: pct(stem),
                phi: q.phi,
                flagged: n == 0,
            }
        })
        .collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewPoints(xs.len()));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between phi and the chosen correct ratio over questions that
/// have answers.
pub fn correlation(stats: &[QuestionStats], metric: Metric) -> Result<f64, AnalysisError> {
    let rows: Vec<&QuestionStats> = stats.iter().filter(|s| s.n_answers > 0).collect();
    let xs: Vec<f64> = rows.iter().map(|s| s.phi).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|s| match metric {
            Metric::Exact => s.exact_ratio,
            Metric::Stem => s.stem_ratio,
        })
        .collect();
    pearson(&xs, &ys)
}

/// CSV with header `question_id,phi,exact_ratio,stem_ratio,n`, one row per
/// question with at least one answer.
pub fn export_scatter<W: Write>(stats: &[QuestionStats], out: W) -> Result<(), AnalysisError> {
    let err = |e: csv::Error| AnalysisError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["question_id", "phi", "exact_ratio", "stem_ratio", "n"])
        .map_err(err)?;
    for s in stats.iter().filter(|s| s.n_answers > 0) {
        w.write_record([
            s.question_id.clone(),
            s.phi.to_string(),
            s.exact_ratio.to_string(),
            s.stem_ratio.to_string(),
            s.n_answers.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::answer_log::LoggedGrade;
    use crate::bank::tests::question;
    use approx::assert_abs_diff_eq;

    fn ans(q: &str, attempt: u8, exact: bool, stem: bool) -> AnswerLogRecord {
        AnswerLogRecord {
            session_id: "s".into(),
            question_id: q.into(),
            attempt_number: attempt,
            raw_answer: String::new(),
            grade: LoggedGrade { exact, stem },
            hint_issued: false,
            timestamp: String::new(),
        }
    }

    #[test]
    fn pearson_examples() {
        assert_abs_diff_eq!(pearson(&[1., 2., 3.], &[2., 4., 6.]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert_eq!(pearson(&[1., 1.], &[1., 2.]), Err(AnalysisError::ZeroVariance));
        assert_eq!(pearson(&[1.], &[1.]), Err(AnalysisError::TooFewPoints(1)));
        assert_eq!(pearson(&[1., 2.], &[1.]), Err(AnalysisError::LengthMismatch(2, 1)));
    }

    #[test]
    fn aggregate_first_attempts() {
        let bank = vec![question("q1", "peace", 0.9), question("q2", "turn", 0.4)];
        let log = vec![
            ans("q1", 1, true, true),
            ans("q1", 1, false, false),
            ans("q1", 1, true, true),
            ans("q1", 1, false, true),
            ans("q1", 2, true, true),
        ];
        let stats = aggregate(&bank, &log).unwrap();
        assert_eq!(stats[0].n_answers, 4);
        assert_eq!(stats[0].exact_ratio, 50.0);
        assert_eq!(stats[0].stem_ratio, 75.0);
        assert!(!stats[0].flagged);
        assert_eq!(stats[1].n_answers, 0);
        assert_eq!(stats[1].exact_ratio, 0.0);
        assert!(stats[1].flagged);
    }

    #[test]
    fn dangling_reference() {
        let bank = vec![question("q1", "peace", 0.9)];
        assert_eq!(
            aggregate(&bank, &[ans("zz", 1, true, true)]),
            Err(AnalysisError::DanglingQuestion("zz".into()))
        );
    }

    #[test]
    fn scatter_rows() {
        let bank = vec![
            question("q1", "peace", 0.9),
            question("q2", "turn", 0.4),
            question("q3", "mind", 0.7),
        ];
        let log = vec![ans("q1", 1, true, true), ans("q3", 1, false, true)];
        let stats = aggregate(&bank, &log).unwrap();
        let mut buf = Vec::new();
        export_scatter(&stats, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "question_id,phi,exact_ratio,stem_ratio,n\nq1,0.9,100,100,1\nq3,0.7,0,100,1\n"
        );
        let mut buf = Vec::new();
        export_scatter(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "question_id,phi,exact_ratio,stem_ratio,n\n");
    }

    #[test]
    fn correlation_skips_unanswered() {
        let bank = vec![
            question("q1", "a", 0.9),
            question("q2", "b", 0.5),
            question("q3", "c", 0.1),
            question("q4", "d", 0.3),
        ];
        let log = vec![
            ans("q1", 1, true, true),
            ans("q2", 1, true, true),
            ans("q2", 1, false, false),
            ans("q3", 1, false, false),
        ];
        let stats = aggregate(&bank, &log).unwrap();
        // (0.9, 100), (0.5, 50), (0.1, 0): perfectly linear
        assert_abs_diff_eq!(correlation(&stats, Metric::Exact).unwrap(), 1.0, epsilon = 1e-12);
        let flat = vec![ans("q1", 1, true, true), ans("q2", 1, true, true)];
        let stats = aggregate(&bank, &flat).unwrap();
        assert_eq!(correlation(&stats, Metric::Exact), Err(AnalysisError::ZeroVariance));
    }
}
