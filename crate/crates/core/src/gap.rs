//! Gap score: answer uniqueness of a masked position.
//!
//! The Lorenz curve and Gini coefficient are taken over confidences in
//! ascending order, so a vector monopolised by its top candidate scores
//! close to `1 - 1/N` and a flat vector scores 0. The gap score multiplies
//! the Gini coefficient of the tail starting at the target's rank by the
//! target's share of the top-k confidences.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::mlm::MaskPrediction;
use crate::par;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GapError {
    #[error("confidence vector is empty")]
    Empty,
    #[error("confidence {value} at position {index} is not a finite positive number")]
    NonPositive { index: usize, value: f64 },
    #[error("confidences are not sorted in descending order")]
    NotDescending,
    #[error("Lorenz index {index} outside 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rank {rank} outside 1..={len}")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("top-k of {k} needs at least {k} candidates, have {len}")]
    InsufficientCandidates { k: usize, len: usize },
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
}

fn check_positive(values: &[f64]) -> Result<(), GapError> {
    if values.is_empty() {
        return Err(GapError::Empty);
    }
    match values
        .iter()
        .position(|v| !(v.is_finite() && *v > 0.0))
    {
        Some(index) => Err(GapError::NonPositive {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Non-empty, strictly positive confidences in descending order. Ranks are
/// 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceVector(Vec<f64>);

impl ConfidenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self, GapError> {
        check_positive(&values)?;
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(GapError::NotDescending);
        }
        Ok(ConfidenceVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tail starting at 1-based `rank`.
    pub fn tail(&self, rank: usize) -> Result<&[f64], GapError> {
        if rank == 0 || rank > self.0.len() {
            return Err(GapError::RankOutOfRange {
                rank,
                len: self.0.len(),
            });
        }
        Ok(&self.0[rank - 1..])
    }
}

impl From<&MaskPrediction> for ConfidenceVector {
    fn from(p: &MaskPrediction) -> Self {
        // MaskPrediction already guarantees positive, descending values.
        ConfidenceVector(p.confidences())
    }
}

/// Share of the total held by the `index` smallest confidences.
pub fn lorenz(c: &ConfidenceVector, index: usize) -> Result<f64, GapError> {
    let n = c.len();
    if index > n {
        return Err(GapError::IndexOutOfRange { index, len: n });
    }
    let total: f64 = c.values().iter().sum();
    let lower: f64 = c.values().iter().rev().take(index).sum();
    Ok(lower / total)
}

/// Discrete Gini coefficient of positive values, in `[0, 1 - 1/N]`.
///
/// Order of `values` is irrelevant. Computed as
/// `sum_{j<=N/2} (N+1-2j) (x_(N+1-j) - x_(j)) / (N * sum x)` over the
/// ascending order statistics, which equals one minus twice the trapezoid
/// area under the Lorenz curve. Every term is non-negative.
pub fn gini(values: &[f64]) -> Result<f64, GapError> {
    check_positive(values)?;
    let n = values.len();
    if n == 1 {
        return Ok(0.0);
    }
    let mut asc = values.to_vec();
    asc.sort_by(f64::total_cmp);
    let total: f64 = asc.iter().sum();
    let spread: f64 = (0..n / 2)
        .map(|j| (n - 1 - 2 * j) as f64 * (asc[n - 1 - j] - asc[j]))
        .sum();
    Ok(spread / (n as f64 * total))
}

/// Target confidence over the sum of the `k` largest confidences.
pub fn reweight(c: &ConfidenceVector, rank: usize, k: usize) -> Result<f64, GapError> {
    if k < 2 {
        return Err(GapError::InvalidK(k));
    }
    let n = c.len();
    if k > n {
        return Err(GapError::InsufficientCandidates { k, len: n });
    }
    if rank == 0 || rank > n {
        return Err(GapError::RankOutOfRange { rank, len: n });
    }
    let top: f64 = c.values()[..k].iter().sum();
    Ok(c.values()[rank - 1] / top)
}

/// Gap score with its decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapScoreResult {
    pub phi: f64,
    pub gini: f64,
    pub rw: f64,
    /// 1-based rank of the target; 0 when not found.
    pub target_rank_j: usize,
    pub found: bool,
}

impl GapScoreResult {
    pub const ABSENT: GapScoreResult = GapScoreResult {
        phi: 0.0,
        gini: 0.0,
        rw: 0.0,
        target_rank_j: 0,
        found: false,
    };
}

/// Scores `target` against a prediction. A target missing from the
/// candidates scores 0 with `found == false`.
pub fn gap_score(
    prediction: &MaskPrediction,
    target: &str,
    k: usize,
) -> Result<GapScoreResult, GapError> {
    let Some(j) = prediction.rank_of(target) else {
        return Ok(GapScoreResult::ABSENT);
    };
    let c = ConfidenceVector::from(prediction);
    let rw = reweight(&c, j, k)?;
    let g = gini(c.tail(j)?)?;
    Ok(GapScoreResult {
        phi: g * rw,
        gini: g,
        rw,
        target_rank_j: j,
        found: true,
    })
}

/// Scores a batch of `(id, prediction)` pairs for one target, in parallel
/// when the `parallel` feature is on.
pub fn score_all(
    items: &[(String, MaskPrediction)],
    target: &str,
    k: usize,
) -> Vec<Result<GapScoreResult, GapError>> {
    par::map(items, |(_, p)| gap_score(p, target, k))
}

/// Single-threaded [`score_all`].
pub fn score_all_sequential(
    items: &[(String, MaskPrediction)],
    target: &str,
    k: usize,
) -> Vec<Result<GapScoreResult, GapError>> {
    par::map_sequential(items, |(_, p)| gap_score(p, target, k))
}

/// Scored sentences ordered by phi descending, ties by id ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedQuestions {
    pub entries: Vec<(String, GapScoreResult)>,
}

fn by_phi_desc(a: &(String, GapScoreResult), b: &(String, GapScoreResult)) -> Ordering {
    b.1.phi.total_cmp(&a.1.phi).then_with(|| a.0.cmp(&b.0))
}

pub fn rank(results: Vec<(String, GapScoreResult)>) -> Result<RankedQuestions, GapError> {
    let mut seen = HashSet::with_capacity(results.len());
    for (id, _) in &results {
        if !seen.insert(id.as_str()) {
            return Err(GapError::DuplicateId(id.clone()));
        }
    }
    let mut entries = results;
    entries.sort_by(by_phi_desc);
    Ok(RankedQuestions { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::Candidate;
    use approx::assert_abs_diff_eq;

    fn cv(v: &[f64]) -> ConfidenceVector {
        ConfidenceVector::new(v.to_vec()).unwrap()
    }

    fn prediction(c: &[(&str, f64)]) -> MaskPrediction {
        MaskPrediction::new(c.iter().map(|(w, p)| Candidate::new(*w, *p)).collect()).unwrap()
    }

    const PEACE: [(&str, f64); 5] = [
        ("peace", 0.80),
        ("piece", 0.10),
        ("state", 0.05),
        ("calm", 0.03),
        ("sense", 0.02),
    ];

    #[test]
    fn lorenz_examples() {
        assert_abs_diff_eq!(lorenz(&cv(&[0.25; 4]), 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(lorenz(&cv(&[1.0]), 1).unwrap(), 1.0);
        let c = cv(&[0.8, 0.1, 0.05, 0.03, 0.02]);
        assert_abs_diff_eq!(lorenz(&c, 3).unwrap(), 0.10, epsilon = 1e-12);
        assert_eq!(lorenz(&c, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(lorenz(&c, 5).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(
            lorenz(&c, 6),
            Err(GapError::IndexOutOfRange { index: 6, len: 5 })
        );
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[0.25; 4]).unwrap(), 0.0);
        assert_abs_diff_eq!(gini(&[1.0, 1e-9, 1e-9, 1e-9]).unwrap(), 0.75, epsilon = 1e-6);
        assert_abs_diff_eq!(gini(&[0.8, 0.1, 0.05, 0.03, 0.02]).unwrap(), 0.652, epsilon = 1e-12);
        assert_eq!(gini(&[0.3]).unwrap(), 0.0);
        assert_eq!(gini(&[]), Err(GapError::Empty));
        assert!(matches!(gini(&[0.5, 0.0]), Err(GapError::NonPositive { index: 1, .. })));
    }

    #[test]
    fn reweight_examples() {
        let c = cv(&[0.8, 0.1, 0.05, 0.03, 0.02]);
        assert_abs_diff_eq!(reweight(&c, 1, 2).unwrap(), 0.888_888_888_9, epsilon = 1e-9);
        assert_eq!(reweight(&cv(&[0.5, 0.5]), 1, 2).unwrap(), 0.5);
        assert_abs_diff_eq!(
            reweight(&cv(&[0.45, 0.40, 0.10, 0.05]), 2, 2).unwrap(),
            0.470_588_235_3,
            epsilon = 1e-9
        );
        assert_eq!(
            reweight(&cv(&[0.9]), 1, 2),
            Err(GapError::InsufficientCandidates { k: 2, len: 1 })
        );
        assert_eq!(reweight(&c, 1, 1), Err(GapError::InvalidK(1)));
    }

    #[test]
    fn gap_worked_examples() {
        let r = gap_score(&prediction(&PEACE), "peace", 2).unwrap();
        assert_eq!(r.target_rank_j, 1);
        assert_abs_diff_eq!(r.gini, 0.652, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rw, 0.888_889, epsilon = 1e-6);
        assert_abs_diff_eq!(r.phi, 0.579_556, epsilon = 1e-6);
        assert_eq!(r.phi, r.gini * r.rw);

        let p = prediction(&[("make", 0.45), ("take", 0.40), ("hit", 0.10), ("miss", 0.05)]);
        let r = gap_score(&p, "take", 2).unwrap();
        assert_eq!(r.target_rank_j, 2);
        assert_abs_diff_eq!(r.gini, 0.424_242, epsilon = 1e-6);
        assert_abs_diff_eq!(r.rw, 0.470_588, epsilon = 1e-6);
        assert_abs_diff_eq!(r.phi, 0.199_644, epsilon = 1e-6);

        let r = gap_score(&prediction(&PEACE), "zzzz", 2).unwrap();
        assert_eq!(r, GapScoreResult::ABSENT);
    }

    #[test]
    fn target_lookup_ignores_case() {
        let r = gap_score(&prediction(&PEACE), "Peace", 2).unwrap();
        assert_eq!(r.target_rank_j, 1);
    }

    #[test]
    fn rank_ordering() {
        let s = |phi| GapScoreResult { phi, ..GapScoreResult::ABSENT };
        let r = rank(vec![("a".into(), s(0.2)), ("b".into(), s(0.9)), ("c".into(), s(0.5))]).unwrap();
        let ids: Vec<_> = r.entries.iter().map(|e| e.0.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
        let r = rank(vec![("b".into(), s(0.5)), ("a".into(), s(0.5))]).unwrap();
        assert_eq!(r.entries[0].0, "a");
        assert!(rank(vec![]).unwrap().entries.is_empty());
        assert_eq!(
            rank(vec![("a".into(), s(0.1)), ("a".into(), s(0.2))]),
            Err(GapError::DuplicateId("a".into()))
        );
    }

    #[test]
    fn batch_matches_single() {
        let items: Vec<(String, MaskPrediction)> = (0..20)
            .map(|i| (format!("s{i}"), prediction(&PEACE)))
            .collect();
        let par = score_all(&items, "piece", 2);
        let seq = score_all_sequential(&items, "piece", 2);
        assert_eq!(par, seq);
    }

    #[test]
    fn vector_constructor_checks() {
        assert_eq!(ConfidenceVector::new(vec![]), Err(GapError::Empty));
        assert_eq!(ConfidenceVector::new(vec![0.1, 0.2]), Err(GapError::NotDescending));
        assert!(cv(&[0.5, 0.3]).tail(3).is_err());
    }
}
