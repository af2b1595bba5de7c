//! Per-replicate rank statistics and their aggregates.

use crate::error::{Error, Result};
use crate::report::{rank_of, ScreenReport};

/// Sorted ranks of the true predictors in one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginalRanks {
    pub best: usize,
    pub medial: usize,
    /// Smallest top-k that captures every true predictor.
    pub worst: usize,
}

impl MarginalRanks {
    /// From unordered ranks; medial is the middle order statistic
    /// (lower middle for an even count).
    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::invalid("no truth ranks"));
        }
        let mut r = ranks.to_vec();
        r.sort_unstable();
        Ok(Self {
            best: r[0],
            medial: r[(r.len() - 1) / 2],
            worst: r[r.len() - 1],
        })
    }
}

pub fn rank_stats_marginal(report: &ScreenReport, truth: &[usize]) -> Result<MarginalRanks> {
    let ranks = truth
        .iter()
        .map(|&j| rank_of(report, &[j]))
        .collect::<Result<Vec<_>>>()?;
    MarginalRanks::from_ranks(&ranks)
}

/// Ranks of the true interactions in one replicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRanks {
    pub ranks: Vec<usize>,
}

/// Cut-off for the "within the top five" proportions.
pub const TOP_WINDOW: usize = 5;

impl InteractionRanks {
    pub fn in_window(&self, t: usize) -> bool {
        self.ranks[t] <= TOP_WINDOW
    }

    /// Some true interaction is ranked first.
    pub fn top(&self) -> bool {
        self.ranks.iter().any(|&r| r == 1)
    }

    /// Every true interaction is within the window.
    pub fn all_in_window(&self) -> bool {
        self.ranks.iter().all(|&r| r <= TOP_WINDOW)
    }

    /// Number of leading interactions needed to contain all true ones.
    pub fn min_model_size(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }
}

pub fn rank_stats_interaction(report: &ScreenReport, truth: &[Vec<usize>]) -> Result<InteractionRanks> {
    Ok(InteractionRanks {
        ranks: truth
            .iter()
            .map(|t| rank_of(report, t))
            .collect::<Result<_>>()?,
    })
}

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile_type7(values: &[f64], prob: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalSummary {
    pub mean_best: f64,
    pub mean_medial: f64,
    pub mean_worst: f64,
    pub median_best: f64,
    pub median_medial: f64,
    pub median_worst: f64,
}

impl MarginalSummary {
    /// Medians are taken over per-replicate statistics.
    pub fn from_reps(reps: &[MarginalRanks]) -> Self {
        let col = |f: fn(&MarginalRanks) -> usize| -> Vec<f64> {
            reps.iter().map(|r| f(r) as f64).collect()
        };
        let (b, m, w) = (col(|r| r.best), col(|r| r.medial), col(|r| r.worst));
        Self {
            mean_best: mean(&b),
            mean_medial: mean(&m),
            mean_worst: mean(&w),
            median_best: quantile_type7(&b, 0.5),
            median_medial: quantile_type7(&m, 0.5),
            median_worst: quantile_type7(&w, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSummary {
    /// Per true interaction: share of replicates with it in the top five.
    pub p_in_window: Vec<f64>,
    pub p_top: f64,
    pub p_all: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

impl InteractionSummary {
    pub fn from_reps(reps: &[InteractionRanks]) -> Self {
        let total = reps.len() as f64;
        let share = |f: &dyn Fn(&InteractionRanks) -> bool| reps.iter().filter(|r| f(r)).count() as f64 / total;
        let truths = reps.first().map_or(0, |r| r.ranks.len());
        let sizes: Vec<f64> = reps.iter().map(|r| r.min_model_size() as f64).collect();
        Self {
            p_in_window: (0..truths).map(|t| share(&|r| r.in_window(t))).collect(),
            p_top: share(&|r| r.top()),
            p_all: share(&|r| r.all_in_window()),
            q25: quantile_type7(&sizes, 0.25),
            q50: quantile_type7(&sizes, 0.50),
            q75: quantile_type7(&sizes, 0.75),
            q90: quantile_type7(&sizes, 0.90),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::NormSpec;
    use crate::report::{Method, ScreenMeta, UtilityScore};

    fn report_with_order(order: &[usize]) -> ScreenReport {
        let n = order.len();
        let scores = order
            .iter()
            .enumerate()
            .map(|(pos, &j)| UtilityScore::new(vec![j], (n - pos) as f64))
            .collect();
        ScreenReport::new(
            scores,
            Method::GenCorr(NormSpec::FROBENIUS),
            1,
            ScreenMeta { n: 10, p: n, q: 1, candidates: n as u128, degenerate: vec![] },
        )
    }

    #[test]
    fn perfect_and_scrambled_marginal_ranks() {
        let r = report_with_order(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let s = rank_stats_marginal(&r, &[0, 1, 2]).unwrap();
        assert_eq!((s.best, s.medial, s.worst), (1, 2, 3));
        // truths at ranks 5, 1, 9
        let r = report_with_order(&[1, 3, 4, 5, 0, 6, 7, 8, 2, 9]);
        let s = rank_stats_marginal(&r, &[0, 1, 2]).unwrap();
        assert_eq!((s.best, s.medial, s.worst), (1, 5, 9));
        assert!(rank_stats_marginal(&r, &[0, 42]).is_err());
    }

    #[test]
    fn interaction_flags() {
        let a = InteractionRanks { ranks: vec![1, 2] };
        assert!(a.in_window(0) && a.in_window(1) && a.top() && a.all_in_window());
        assert_eq!(a.min_model_size(), 2);
        let b = InteractionRanks { ranks: vec![3, 7] };
        assert!(b.in_window(0) && !b.in_window(1) && !b.top() && !b.all_in_window());
        assert_eq!(b.min_model_size(), 7);
    }

    #[test]
    fn aggregate_matches_recount() {
        let reps = vec![
            InteractionRanks { ranks: vec![1, 2] },
            InteractionRanks { ranks: vec![3, 7] },
            InteractionRanks { ranks: vec![6, 1] },
            InteractionRanks { ranks: vec![2, 1] },
        ];
        let s = InteractionSummary::from_reps(&reps);
        assert_eq!(s.p_in_window, vec![0.75, 0.75]);
        assert_eq!(s.p_top, 0.75);
        assert_eq!(s.p_all, 0.5);
        // sizes 2, 7, 6, 2 -> sorted 2, 2, 6, 7
        assert_eq!(s.q50, 4.0);
        assert_eq!(s.q25, 2.0);
        assert!((s.q90 - 6.7).abs() < 1e-12);
    }

    #[test]
    fn type7_quantiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(quantile_type7(&v, 0.5), 5.5);
        assert!((quantile_type7(&v, 0.9) - 9.1).abs() < 1e-12);
        assert_eq!(quantile_type7(&[3.0], 0.25), 3.0);
    }

    #[test]
    fn marginal_summary_uses_per_rep_medians() {
        let reps = [
            MarginalRanks { best: 1, medial: 2, worst: 3 },
            MarginalRanks { best: 1, medial: 2, worst: 4 },
            MarginalRanks { best: 2, medial: 9, worst: 40 },
            MarginalRanks { best: 1, medial: 3, worst: 3 },
        ];
        let s = MarginalSummary::from_reps(&reps);
        assert_eq!(s.mean_best, 1.25);
        assert_eq!(s.mean_worst, 12.5);
        assert_eq!(s.median_worst, 3.5);
        assert_eq!(s.median_medial, 2.5);
    }
}
