use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::norm::NormSpec;

/// Utility of one candidate: a strictly increasing tuple of 0-based
/// predictor indices (length 1 for marginal screens) and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityScore {
    pub indices: Vec<usize>,
    pub value: f64,
}

impl UtilityScore {
    pub fn new(indices: Vec<usize>, value: f64) -> Self {
        Self { indices, value }
    }
}

/// Report ordering: larger value first, ties broken by lexicographically
/// smaller indices. `Less` means `a` ranks ahead of `b`.
pub fn rank_order(a: &UtilityScore, b: &UtilityScore) -> Ordering {
    rank_order_parts(a.value, &a.indices, b.value, &b.indices)
}

#[inline]
pub(crate) fn rank_order_parts(av: f64, ai: &[usize], bv: f64, bi: &[usize]) -> Ordering {
    bv.total_cmp(&av).then_with(|| ai.cmp(bi))
}

/// Which scoring rule produced a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    GenCorr(NormSpec),
    Sirs,
    DcSis,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::GenCorr(n) if *n == NormSpec::TAXICAB => write!(f, "gencorr-T"),
            Method::GenCorr(n) if *n == NormSpec::FROBENIUS => write!(f, "gencorr-F"),
            Method::GenCorr(n) => write!(f, "gencorr-{}", n.label()),
            Method::Sirs => write!(f, "sirs"),
            Method::DcSis => write!(f, "dcsis"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenMeta {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Size of the candidate space actually scored.
    pub candidates: u128,
    /// Predictors excluded from the candidate space.
    pub degenerate: Vec<usize>,
}

/// Ranked screening outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenReport {
    scores: Vec<UtilityScore>,
    method: Method,
    order: usize,
    meta: ScreenMeta,
}

impl ScreenReport {
    /// Sorts `scores` into report order.
    pub fn new(mut scores: Vec<UtilityScore>, method: Method, order: usize, meta: ScreenMeta) -> Self {
        scores.sort_by(rank_order);
        Self {
            scores,
            method,
            order,
            meta,
        }
    }

    pub fn scores(&self) -> &[UtilityScore] {
        &self.scores
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn norm(&self) -> Option<NormSpec> {
        match self.method {
            Method::GenCorr(n) => Some(n),
            _ => None,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn meta(&self) -> &ScreenMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// True when the report holds fewer entries than the candidate space.
    pub fn is_truncated(&self) -> bool {
        (self.scores.len() as u128) < self.meta.candidates
    }

    /// Indices of the first `k` entries (single-index tuples flattened).
    pub fn top_indices(&self, k: usize) -> Vec<Vec<usize>> {
        self.scores.iter().take(k).map(|s| s.indices.clone()).collect()
    }

    pub fn value_of(&self, tuple: &[usize]) -> Option<f64> {
        self.scores.iter().find(|s| s.indices == tuple).map(|s| s.value)
    }
}

/// 1-based position of `tuple` in the report.
pub fn rank_of(report: &ScreenReport, tuple: &[usize]) -> Result<usize> {
    report
        .scores
        .iter()
        .position(|s| s.indices == tuple)
        .map(|i| i + 1)
        .ok_or_else(|| Error::NotFound(tuple.to_vec()))
}

/// Tuples whose utility strictly exceeds a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub tuples: BTreeSet<Vec<usize>>,
    pub cutoff: f64,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }
}

/// Thresholds a report at `c`. Null utilities fluctuate around √γ̂ at the
/// sample level, so a cutoff near √γ̂ is a heuristic, not a guarantee.
pub fn threshold_select(report: &ScreenReport, c: f64) -> ModelSet {
    if report.is_truncated() {
        log::warn!(
            "thresholding a top-{} report that covers only part of {} candidates",
            report.len(),
            report.meta.candidates
        );
    }
    ModelSet {
        tuples: report
            .scores
            .iter()
            .filter(|s| s.value > c)
            .map(|s| s.indices.clone())
            .collect(),
        cutoff: c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(scores: Vec<(Vec<usize>, f64)>) -> ScreenReport {
        let k = scores.len() as u128;
        ScreenReport::new(
            scores.into_iter().map(|(i, v)| UtilityScore::new(i, v)).collect(),
            Method::GenCorr(NormSpec::FROBENIUS),
            1,
            ScreenMeta {
                n: 10,
                p: 5,
                q: 1,
                candidates: k,
                degenerate: vec![],
            },
        )
    }

    #[test]
    fn ties_prefer_smaller_indices() {
        let r = report(vec![(vec![3], 2.0), (vec![1], 2.0), (vec![0], 1.0), (vec![2], 5.0)]);
        let order: Vec<usize> = r.scores().iter().map(|s| s.indices[0]).collect();
        assert_eq!(order, vec![2, 1, 3, 0]);
        assert_eq!(rank_of(&r, &[2]).unwrap(), 1);
        assert_eq!(rank_of(&r, &[1]).unwrap(), 2);
        assert_eq!(rank_of(&r, &[3]).unwrap(), 3);
    }

    #[test]
    fn rank_of_absent_is_not_found() {
        let r = report(vec![(vec![0], 1.0)]);
        assert!(matches!(rank_of(&r, &[4]), Err(Error::NotFound(t)) if t == vec![4]));
    }

    #[test]
    fn threshold_examples() {
        let r = report(vec![(vec![0, 1], 3.0), (vec![0, 2], 1.5), (vec![1, 2], 0.5)]);
        assert_eq!(threshold_select(&r, 0.0).len(), 3);
        assert!(threshold_select(&r, 3.0).is_empty());
        let s = threshold_select(&r, 1.0);
        assert!(s.contains(&[0, 1]) && s.contains(&[0, 2]) && !s.contains(&[1, 2]));
    }
}
