//! Extract, filter, mask, predict, score, rank and select, per target word.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bank::{Question, QuestionSource};
use crate::gap::{self, GapScoreResult};
use crate::mlm::{BackendError, MaskPrediction, MaskPredictor};
use crate::text::{
    extract_target_sentences, filter_sentences, mask_sentence, ExtractionConfig, MaskedSentence,
    SentenceRecord,
};
use crate::BLANK_MARKER;

/// Number of candidates copied into each question for auditing.
pub const TOP_CANDIDATES_KEPT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GenerationJob {
    pub targets: Vec<String>,
    pub extraction: ExtractionConfig,
    pub k: usize,
    pub min_gap: f64,
    pub per_target_limit: usize,
    /// Timestamp written into every question.
    pub created_at: String,
    /// Seeded random subset of the selected questions.
    pub sample: Option<SampleSpec>,
}

impl GenerationJob {
    pub const DEFAULT_PER_TARGET_LIMIT: usize = 20;

    pub fn new(targets: Vec<String>, extraction: ExtractionConfig, created_at: String) -> Self {
        GenerationJob {
            targets,
            extraction,
            k: crate::DEFAULT_TOP_K,
            min_gap: crate::DEFAULT_MIN_GAP,
            per_target_limit: Self::DEFAULT_PER_TARGET_LIMIT,
            created_at,
            sample: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidJob(m));
        if self.targets.is_empty() {
            return bad("no targets".into());
        }
        if let Some(t) = self
            .targets
            .iter()
            .find(|t| t.is_empty() || t.to_lowercase() != **t || t.contains(char::is_whitespace))
        {
            return bad(format!("target {t:?} must be a single lowercase word"));
        }
        if !(0.0..1.0).contains(&self.min_gap) {
            return bad(format!("min_gap {} outside [0, 1)", self.min_gap));
        }
        if self.per_target_limit == 0 {
            return bad("per_target_limit must be at least 1".into());
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        self.extraction
            .validate()
            .map_err(|e| PipelineError::InvalidJob(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SkipReason {
    OutOfVocab,
    NoPrediction,
    TargetAbsent,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::OutOfVocab => "OUT_OF_VOCAB",
            SkipReason::NoPrediction => "NO_PREDICTION",
            SkipReason::TargetAbsent => "TARGET_ABSENT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skip {
    pub sentence_id: String,
    pub reason: SkipReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TargetReport {
    pub target: String,
    pub extracted: usize,
    /// Sentences that passed the filters.
    pub filtered: usize,
    /// Sentences with a valid prediction.
    pub predicted: usize,
    /// Sentences where the target was found among the candidates.
    pub scored: usize,
    pub selected: usize,
    pub skipped: Vec<Skip>,
}

impl TargetReport {
    pub fn filtered_out(&self) -> usize {
        self.extracted - self.filtered
    }

    pub fn skip_counts(&self) -> BTreeMap<SkipReason, usize> {
        let mut m = BTreeMap::new();
        for s in &self.skipped {
            *m.entry(s.reason).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GenerationReport {
    pub targets: Vec<TargetReport>,
    /// Questions left after sampling, when sampling was requested.
    pub sampled: Option<usize>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl GenerationReport {
    pub fn total_selected(&self) -> usize {
        self.targets.iter().map(|t| t.selected).sum()
    }
}

impl fmt::Display for GenerationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>9} {:>8} {:>9} {:>6} {:>8}  skipped",
            "target", "extracted", "filtered", "predicted", "scored", "selected"
        )?;
        for t in &self.targets {
            let skips: Vec<String> = t
                .skip_counts()
                .into_iter()
                .map(|(r, n)| format!("{r}={n}"))
                .collect();
            writeln!(
                f,
                "{:<16} {:>9} {:>8} {:>9} {:>6} {:>8}  {}",
                t.target,
                t.extracted,
                t.filtered,
                t.predicted,
                t.scored,
                t.selected,
                if skips.is_empty() { "-".to_string() } else { skips.join(" ") }
            )?;
        }
        write!(f, "selected {} question(s)", self.total_selected())?;
        if let Some(n) = self.sampled {
            write!(f, ", sampled {n}")?;
        }
        write!(f, " in {:.2?}", self.elapsed)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
}

struct Scored {
    masked: MaskedSentence,
    record: SentenceRecord,
    prediction: MaskPrediction,
    score: GapScoreResult,
}

fn display_text(masked: &MaskedSentence) -> String {
    masked.masked_text.replacen(&masked.placeholder, BLANK_MARKER, 1)
}

fn build_question(s: &Scored, target: &str, job: &GenerationJob, model_name: &str) -> Question {
    Question {
        question_id: format!("{target}@{}", s.record.id),
        masked_text: display_text(&s.masked),
        target_word: target.to_string(),
        phi: s.score.phi,
        gini: s.score.gini,
        rw: s.score.rw,
        target_rank: s.score.target_rank_j,
        top_candidates: s
            .prediction
            .candidates()
            .iter()
            .take(TOP_CANDIDATES_KEPT)
            .map(|c| (c.word.clone(), c.confidence))
            .collect(),
        source: QuestionSource {
            doc: s.record.source.doc.clone(),
            sentence_id: s.record.id.clone(),
            offset: s.record.source.offset,
        },
        model_name: model_name.to_string(),
        created_at: job.created_at.clone(),
        extra: Default::default(),
    }
}

struct TargetOutcome {
    report: TargetReport,
    questions: Vec<Question>,
    transport_failures: usize,
    attempted: usize,
}

fn run_target(
    job: &GenerationJob,
    target: &str,
    corpus: &[SentenceRecord],
    backend: &dyn MaskPredictor,
) -> Result<TargetOutcome, PipelineError> {
    let cfg = &job.extraction;
    let mut report = TargetReport {
        target: target.to_string(),
        ..Default::default()
    };
    let extracted = extract_target_sentences(corpus, target);
    report.extracted = extracted.len();
    let kept = filter_sentences(&extracted, target, cfg);
    report.filtered = kept.len();
    let mut outcome = TargetOutcome {
        report,
        questions: Vec::new(),
        transport_failures: 0,
        attempted: 0,
    };
    if kept.is_empty() {
        return Ok(outcome);
    }

    let in_vocab = backend.in_vocab(target).map_err(|e| match e {
        BackendError::Transport(m) => PipelineError::BackendUnavailable(m),
        other => PipelineError::BackendUnavailable(other.to_string()),
    })?;
    let report = &mut outcome.report;
    if !in_vocab {
        report.skipped = kept
            .iter()
            .map(|r| Skip {
                sentence_id: r.id.clone(),
                reason: SkipReason::OutOfVocab,
                detail: format!("{target:?} is not a single model token"),
            })
            .collect();
        return Ok(outcome);
    }

    let mut masked = Vec::with_capacity(kept.len());
    let mut records = Vec::with_capacity(kept.len());
    for r in kept {
        if r.text.contains(BLANK_MARKER) {
            report.skipped.push(Skip {
                sentence_id: r.id.clone(),
                reason: SkipReason::NoPrediction,
                detail: format!("sentence already contains {BLANK_MARKER}"),
            });
            continue;
        }
        match mask_sentence(&r, target, 0, &cfg.mask_placeholder) {
            Ok(m) => {
                masked.push(m);
                records.push(r);
            }
            Err(e) => report.skipped.push(Skip {
                sentence_id: r.id.clone(),
                reason: SkipReason::NoPrediction,
                detail: e.to_string(),
            }),
        }
    }

    outcome.attempted = masked.len();
    let predictions = backend.predict_batch(&masked);
    let mut ok = Vec::new();
    for ((m, r), p) in masked.into_iter().zip(records).zip(predictions) {
        match p {
            Ok(p) => ok.push((m, r, p)),
            Err(e) => {
                if e.is_transport() {
                    outcome.transport_failures += 1;
                }
                report.skipped.push(Skip {
                    sentence_id: r.id.clone(),
                    reason: SkipReason::NoPrediction,
                    detail: e.to_string(),
                });
            }
        }
    }
    report.predicted = ok.len();

    let items: Vec<(String, MaskPrediction)> =
        ok.iter().map(|(_, r, p)| (r.id.clone(), p.clone())).collect();
    let scores = gap::score_all(&items, target, job.k);
    let mut scored = Vec::new();
    for ((m, r, p), s) in ok.into_iter().zip(scores) {
        match s {
            Ok(s) if s.found => scored.push(Scored {
                masked: m,
                record: r,
                prediction: p,
                score: s,
            }),
            Ok(_) => report.skipped.push(Skip {
                sentence_id: r.id.clone(),
                reason: SkipReason::TargetAbsent,
                detail: format!("{target:?} not among {} candidates", p.truncation_m()),
            }),
            Err(e) => report.skipped.push(Skip {
                sentence_id: r.id.clone(),
                reason: SkipReason::NoPrediction,
                detail: e.to_string(),
            }),
        }
    }
    report.scored = scored.len();

    let ranked = gap::rank(
        scored
            .iter()
            .map(|s| (s.record.id.clone(), s.score))
            .collect(),
    )
    .expect("sentence ids are unique within a corpus");
    let by_id: BTreeMap<&str, &Scored> = scored.iter().map(|s| (s.record.id.as_str(), s)).collect();
    let model_name = backend.descriptor().model_name.clone();
    outcome.questions = ranked
        .entries
        .iter()
        .filter(|(_, s)| s.phi >= job.min_gap)
        .take(job.per_target_limit)
        .map(|(id, _)| build_question(by_id[id.as_str()], target, job, &model_name))
        .collect();
    outcome.report.selected = outcome.questions.len();
    Ok(outcome)
}

/// Runs the whole generation for every target.
///
/// Output holds each target's questions in target order, phi descending
/// within a target. Per-sentence failures end up in the report; only an
/// unreachable backend aborts the job.
pub fn run_generation(
    job: &GenerationJob,
    corpus: &[SentenceRecord],
    backend: &dyn MaskPredictor,
) -> Result<(Vec<Question>, GenerationReport), PipelineError> {
    job.validate()?;
    if corpus.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let started = Instant::now();
    let mut report = GenerationReport::default();
    let mut questions = Vec::new();
    let (mut attempted, mut transport_failures) = (0, 0);
    for target in &job.targets {
        let outcome = run_target(job, target, corpus, backend)?;
        attempted += outcome.attempted;
        transport_failures += outcome.transport_failures;
        questions.extend(outcome.questions);
        report.targets.push(outcome.report);
    }
    if attempted > 0 && transport_failures == attempted {
        return Err(PipelineError::BackendUnavailable(format!(
            "all {attempted} prediction requests failed"
        )));
    }
    if let Some(spec) = job.sample {
        questions = sample(questions, spec);
        report.sampled = Some(questions.len());
    }
    report.elapsed = started.elapsed();
    Ok((questions, report))
}

/// Seeded subset of `n` questions, original order kept.
pub fn sample(questions: Vec<Question>, spec: SampleSpec) -> Vec<Question> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut idx = rand::seq::index::sample(&mut rng, questions.len(), spec.n.min(questions.len())).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| questions[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::{BackendDescriptor, TabularBackend, TabularRow};
    use crate::text::{SourceRef, WordList};

    const WORDS: &str = "the treaty kept peace between two old nations for many years \
        she found peace of mind by the quiet lake at dawn we hope for peace and calm \
        in our small town this summer they signed a new agreement to keep peace in the region \
        after war people wanted lasting peace more than anything else";

    fn corpus() -> Vec<SentenceRecord> {
        [
            "The treaty kept peace between two old nations for many years.",
            "She found peace of mind by the quiet lake at dawn.",
            "We hope for peace and calm in our small town this summer.",
            "They signed a new agreement to keep peace in the region.",
            "After the war people wanted lasting peace more than anything else.",
            "Short peace line.",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            SentenceRecord::new(format!("doc#{i}"), *t, SourceRef {
                doc: "doc".into(),
                offset: 0,
            })
            .unwrap()
        })
        .collect()
    }

    fn flat(head: (&str, f64), rest: f64, n: usize) -> Vec<(String, f64)> {
        let mut v = vec![(head.0.to_string(), head.1)];
        v.extend((0..n).map(|i| (format!("w{i}"), rest)));
        v
    }

    fn rows() -> Vec<TabularRow> {
        let r = |k: &str, candidates: Vec<(String, f64)>| TabularRow {
            key: k.into(),
            target: None,
            candidates,
        };
        let lit = |c: &[(&str, f64)]| c.iter().map(|(w, p)| (w.to_string(), *p)).collect();
        vec![
            r("doc#0", flat(("peace", 0.92), 0.005, 12)),
            r("doc#1", lit(&[("peace", 0.80), ("piece", 0.10), ("state", 0.05), ("calm", 0.03), ("sense", 0.02)])),
            r("doc#2", lit(&[("rain", 0.40), ("peace", 0.35), ("snow", 0.15), ("sun", 0.10)])),
            r("doc#3", flat(("peace", 0.97), 0.002, 12)),
            r("doc#4", flat(("peace", 0.88), 0.004, 20)),
        ]
    }

    fn job(min_gap: f64) -> GenerationJob {
        let wl = WordList::new(WORDS.split_whitespace()).unwrap();
        let mut j = GenerationJob::new(vec!["peace".into()], ExtractionConfig::new(wl), "t0".into());
        j.min_gap = min_gap;
        j
    }

    fn backend() -> TabularBackend {
        TabularBackend::from_rows(BackendDescriptor::tabular("mem", "fixture"), rows()).unwrap()
    }

    // Trapezoid-rule Gini straight from the Lorenz definition, for the
    // expected values below.
    fn oracle_phi(c: &[f64], j: usize) -> f64 {
        let mut tail: Vec<f64> = c[j - 1..].to_vec();
        tail.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = tail.len() as f64;
        let total: f64 = tail.iter().sum();
        let mut prev = 0.0;
        let mut cum = 0.0;
        let mut area = 0.0;
        for v in &tail {
            cum += v;
            let l = cum / total;
            area += (l + prev) / 2.0 / n;
            prev = l;
        }
        (1.0 - 2.0 * area) * c[j - 1] / (c[0] + c[1])
    }

    #[test]
    fn selects_above_threshold_descending() {
        let tail = |head: f64, rest: f64, n: usize| {
            let mut v = vec![head];
            v.extend(std::iter::repeat_n(rest, n));
            v
        };
        let expected: Vec<(&str, f64)> = vec![
            ("doc#0", oracle_phi(&tail(0.92, 0.005, 12), 1)),
            ("doc#1", oracle_phi(&[0.80, 0.10, 0.05, 0.03, 0.02], 1)),
            ("doc#2", oracle_phi(&[0.40, 0.35, 0.15, 0.10], 2)),
            ("doc#3", oracle_phi(&tail(0.97, 0.002, 12), 1)),
            ("doc#4", oracle_phi(&tail(0.88, 0.004, 20), 1)),
        ];
        let mut above: Vec<_> = expected.iter().filter(|(_, p)| *p >= 0.8).collect();
        above.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        assert_eq!(above.len(), 3);

        let (qs, report) = run_generation(&job(0.8), &corpus(), &backend()).unwrap();
        let got: Vec<&str> = qs.iter().map(|q| q.source.sentence_id.as_str()).collect();
        let want: Vec<&str> = above.iter().map(|(id, _)| *id).collect();
        assert_eq!(got, want);
        for (q, (_, phi)) in qs.iter().zip(&above) {
            assert!((q.phi - phi).abs() < 1e-12);
            assert!(q.masked_text.contains(BLANK_MARKER));
            assert!(!q.masked_text.to_lowercase().contains("peace"));
            q.validate().unwrap();
        }
        let t = &report.targets[0];
        assert_eq!((t.extracted, t.filtered, t.predicted, t.scored, t.selected), (6, 5, 5, 5, 3));
    }

    #[test]
    fn argmax_with_limit_one() {
        let mut j = job(0.0);
        j.per_target_limit = 1;
        let (qs, _) = run_generation(&j, &corpus(), &backend()).unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].source.sentence_id, "doc#3");
    }

    #[test]
    fn absent_target_word() {
        let mut j = job(0.0);
        j.targets = vec!["zebra".into()];
        let (qs, report) = run_generation(&j, &corpus(), &backend()).unwrap();
        assert!(qs.is_empty());
        assert_eq!(report.targets[0].extracted, 0);
    }

    #[test]
    fn report_conservation_with_skips() {
        let mut rows = rows();
        rows.remove(4); // doc#4 -> NO_PREDICTION
        rows[0].candidates = vec![("war".into(), 0.6), ("trade".into(), 0.3)]; // TARGET_ABSENT
        let b = TabularBackend::from_rows(BackendDescriptor::tabular("mem", "f"), rows).unwrap();
        let (_, report) = run_generation(&job(0.0), &corpus(), &b).unwrap();
        let t = &report.targets[0];
        let counts = t.skip_counts();
        assert_eq!(counts[&SkipReason::NoPrediction], 1);
        assert_eq!(counts[&SkipReason::TargetAbsent], 1);
        assert_eq!(t.extracted, t.filtered_out() + t.skipped.len() + t.scored);
        assert!(t.extracted >= t.filtered && t.filtered >= t.predicted && t.predicted >= t.selected);
    }

    #[test]
    fn deterministic_output() {
        let a = run_generation(&job(0.0), &corpus(), &backend()).unwrap().0;
        let b = run_generation(&job(0.0), &corpus(), &backend()).unwrap().0;
        assert_eq!(crate::bank::to_jsonl(&a), crate::bank::to_jsonl(&b));
    }

    #[test]
    fn job_validation() {
        let mut j = job(1.5);
        assert!(matches!(run_generation(&j, &corpus(), &backend()), Err(PipelineError::InvalidJob(_))));
        j.min_gap = 0.8;
        j.targets.clear();
        assert!(matches!(j.validate(), Err(PipelineError::InvalidJob(m)) if m == "no targets"));
        assert!(matches!(
            run_generation(&job(0.8), &[], &backend()),
            Err(PipelineError::EmptyCorpus)
        ));
    }

    #[test]
    fn seeded_sample() {
        let (qs, _) = run_generation(&job(0.0), &corpus(), &backend()).unwrap();
        let a = sample(qs.clone(), SampleSpec { n: 2, seed: 7 });
        let b = sample(qs.clone(), SampleSpec { n: 2, seed: 7 });
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(sample(qs.clone(), SampleSpec { n: 99, seed: 1 }).len(), qs.len());
    }
}
