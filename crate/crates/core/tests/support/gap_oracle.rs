//! Reference gap score computed straight from the Lorenz-curve definition,
//! with no code shared with the library.

#![allow(dead_code)]

use rand::Rng;

/// Share of the total held by the `i` smallest values.
pub fn lorenz(values: &[f64], i: usize) -> f64 {
    let mut asc = values.to_vec();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total: f64 = asc.iter().sum();
    asc[..i].iter().sum::<f64>() / total
}

/// One minus twice the trapezoid area under the Lorenz curve.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let width = 1.0 / n as f64;
    let area: f64 = (1..=n)
        .map(|i| width * (lorenz(values, i) + lorenz(values, i - 1)) / 2.0)
        .sum();
    1.0 - 2.0 * area
}

pub struct OracleScore {
    pub phi: f64,
    pub gini: f64,
    pub rw: f64,
    pub rank: usize,
}

/// `candidates` in descending confidence order. `None` when the target is
/// not listed.
pub fn gap_score(candidates: &[(String, f64)], target: &str, k: usize) -> Option<OracleScore> {
    let j = candidates
        .iter()
        .position(|(w, _)| w.eq_ignore_ascii_case(target))?
        + 1;
    let conf: Vec<f64> = candidates.iter().map(|(_, c)| *c).collect();
    let g = gini(&conf[j - 1..]);
    let rw = conf[j - 1] / conf[..k].iter().sum::<f64>();
    Some(OracleScore {
        phi: g * rw,
        gini: g,
        rw,
        rank: j,
    })
}

/// Random softmax-like candidate list of 2..=60 words summing to at most 1,
/// with "target" at a random rank or absent.
pub fn random_case<R: Rng>(rng: &mut R) -> Vec<(String, f64)> {
    let m = rng.random_range(2..=60);
    let temperature = rng.random_range(0.2..4.0);
    let logits: Vec<f64> = (0..m).map(|_| rng.random_range(-6.0..6.0) / temperature).collect();
    let max = logits.iter().cloned().fold(f64::MIN, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mass = rng.random_range(0.3..1.0);
    let mut conf: Vec<f64> = exps.iter().map(|e| (e / total * mass).max(1e-12)).collect();
    conf.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let target_at = rng.random_range(0..=m);
    conf.into_iter()
        .enumerate()
        .map(|(i, c)| {
            let w = if i == target_at { "target".to_string() } else { format!("w{i}") };
            (w, c)
        })
        .collect()
}
