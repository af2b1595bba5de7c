//! Generalized-correlation utilities and the marginal / interaction screens.
//!
//! Two evaluation routes exist. The reference route assembles Σ explicitly
//! ([`build_sigma_marginal`], [`build_sigma_interaction`]), normalizes it
//! with [`h_matrix`] and applies [`utility`]. The scan route computes only
//! the first row of H from the [`MomentCache`] in one fused pass per tuple,
//! since the response block of H is the same for every candidate.

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::moments::{
    build_moment_cache, joint_cumulant_hat, sample_covariance, MomentCache, DEFAULT_VAR_TOLERANCE,
};
use crate::norm::NormSpec;
use crate::report::{rank_order_parts, Method, ScreenMeta, ScreenReport, UtilityScore};
use crate::topk::{binomial, unrank_combination, TopK};

/// Candidate-count above which an interaction scan logs a warning.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000_000;

/// Σ_j for predictor `j`: Var(X_j), Cov(X_j, Y) and Cov(Y), divisor n−1.
pub fn build_sigma_marginal(j: usize, cache: &MomentCache, data: &Dataset) -> Result<Array2<f64>> {
    if j >= data.p() {
        return Err(Error::invalid(format!("predictor index {j} out of range")));
    }
    if cache.is_degenerate(j) {
        return Err(Error::DegenerateFeature { index: j });
    }
    let q = data.q();
    let mut sigma = Array2::zeros((q + 1, q + 1));
    sigma[[0, 0]] = cache.x_vars()[j];
    for m in 0..q {
        let c = sample_covariance(data.x_col(j), data.y_col(m))?;
        sigma[[0, m + 1]] = c;
        sigma[[m + 1, 0]] = c;
    }
    sigma
        .slice_mut(ndarray::s![1.., 1..])
        .assign(cache.y_cov());
    Ok(sigma)
}

/// Σ_{j1..jr}: product of predictor variances, joint cumulants κ̂_{r+1}
/// with each response component, and Cov(Y).
pub fn build_sigma_interaction(
    tuple: &[usize],
    cache: &MomentCache,
    data: &Dataset,
) -> Result<Array2<f64>> {
    validate_tuple(tuple, data.p())?;
    if tuple.len() < 2 {
        return Err(Error::invalid(
            "interaction tuples need r >= 2; use the marginal path for r = 1",
        ));
    }
    if let Some(&j) = tuple.iter().find(|&&j| cache.is_degenerate(j)) {
        return Err(Error::DegenerateFeature { index: j });
    }
    let q = data.q();
    let mut sigma = Array2::zeros((q + 1, q + 1));
    sigma[[0, 0]] = tuple.iter().map(|&j| cache.x_vars()[j]).product();
    let cols: Vec<_> = tuple.iter().map(|&j| data.x_col(j)).collect();
    for m in 0..q {
        let k = joint_cumulant_hat(data.y_col(m), &cols)?;
        sigma[[0, m + 1]] = k;
        sigma[[m + 1, 0]] = k;
    }
    sigma
        .slice_mut(ndarray::s![1.., 1..])
        .assign(cache.y_cov());
    Ok(sigma)
}

/// D^{-1/2} Σ D^{-1/2} with D = diag(Σ); the diagonal is set to exactly 1.
pub fn h_matrix(sigma: &Array2<f64>) -> Result<Array2<f64>> {
    let k = sigma.nrows();
    if sigma.ncols() != k {
        return Err(Error::invalid("sigma must be square"));
    }
    let mut sd = Vec::with_capacity(k);
    for i in 0..k {
        let d = sigma[[i, i]];
        if !(d > 0.0) {
            return Err(Error::DegenerateFeature { index: i });
        }
        sd.push(d.sqrt());
    }
    let mut h = Array2::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            h[[a, b]] = if a == b {
                1.0
            } else {
                sigma[[a, b]] / (sd[a] * sd[b])
            };
        }
    }
    Ok(h)
}

/// Entrywise ℓp norm of `h`.
pub fn utility(h: &Array2<f64>, norm: NormSpec) -> f64 {
    norm.root(h.iter().map(|&v| norm.power(v)).sum())
}

fn validate_tuple(tuple: &[usize], p: usize) -> Result<()> {
    if tuple.is_empty() {
        return Err(Error::invalid("empty index tuple"));
    }
    if tuple.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "index tuple {tuple:?} is not strictly increasing"
        )));
    }
    if *tuple.last().unwrap() >= p {
        return Err(Error::invalid(format!("index tuple {tuple:?} out of range")));
    }
    Ok(())
}

/// Four-lane dot product with a fixed summation order.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    let mut s = [0.0f64; 4];
    for (x, y) in ca.zip(cb) {
        s[0] += x[0] * y[0];
        s[1] += x[1] * y[1];
        s[2] += x[2] * y[2];
        s[3] += x[3] * y[3];
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    for (x, y) in ra.iter().zip(rb) {
        t += x * y;
    }
    t
}

/// Precomputed scaled responses for the fused scan.
pub struct ScanKernel<'a> {
    cache: &'a MomentCache,
    n: usize,
    q: usize,
    active: Vec<usize>,
    x_sd: Vec<f64>,
    /// Column-major q×n: centered Y^(m) / ((n−1)·sd_m).
    y_marginal: Vec<f64>,
    /// Column-major q×n: centered Y^(m) / (n·sd_m).
    y_cumulant: Vec<f64>,
}

/// Per-worker buffers for the interaction kernel.
pub struct Scratch {
    prefix_product: Vec<f64>,
    weighted: Vec<f64>,
    prefix_sd: f64,
    h: Vec<f64>,
}

impl<'a> ScanKernel<'a> {
    pub fn new(cache: &'a MomentCache) -> Self {
        let (n, q) = (cache.n(), cache.q());
        let y_sd: Vec<f64> = cache.y_vars().iter().map(|v| v.sqrt()).collect();
        let mut y_marginal = Vec::with_capacity(n * q);
        let mut y_cumulant = Vec::with_capacity(n * q);
        for m in 0..q {
            let col = cache.y_centered().column(m);
            let dm = (n - 1) as f64 * y_sd[m];
            let dc = n as f64 * y_sd[m];
            y_marginal.extend(col.iter().map(|v| v / dm));
            y_cumulant.extend(col.iter().map(|v| v / dc));
        }
        Self {
            cache,
            n,
            q,
            active: cache.active_columns(),
            x_sd: cache.x_vars().iter().map(|v| v.sqrt()).collect(),
            y_marginal,
            y_cumulant,
        }
    }

    pub fn cache(&self) -> &MomentCache {
        self.cache
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            prefix_product: vec![0.0; self.n],
            weighted: vec![0.0; self.n * self.q],
            prefix_sd: 1.0,
            h: vec![0.0; self.q],
        }
    }

    /// Response block contribution Σ_{ℓ,m} |ρ̂_{ℓm}|^p plus the unit corner.
    pub fn base_sum(&self, norm: NormSpec) -> f64 {
        1.0 + self
            .cache
            .y_corr()
            .iter()
            .map(|&r| norm.power(r))
            .sum::<f64>()
    }

    /// Utility from the first off-diagonal row of H.
    #[inline]
    pub fn utility_from_row(base: f64, norm: NormSpec, h: &[f64]) -> f64 {
        let edge: f64 = h.iter().map(|&v| norm.power(v)).sum();
        norm.root(base + 2.0 * edge)
    }

    /// Pearson correlations of predictor `j` with each response component.
    pub fn marginal_row(&self, j: usize, h: &mut [f64]) {
        let x = self.cache.centered_column(j);
        let sd = self.x_sd[j];
        for (m, out) in h.iter_mut().enumerate() {
            let y = &self.y_marginal[m * self.n..(m + 1) * self.n];
            *out = dot(x, y) / sd;
        }
    }

    /// Loads the product of the centered prefix columns into the scratch.
    pub fn prepare_prefix(&self, prefix: &[usize], s: &mut Scratch) {
        let n = self.n;
        s.prefix_product
            .copy_from_slice(self.cache.centered_column(prefix[0]));
        s.prefix_sd = self.x_sd[prefix[0]];
        for &j in &prefix[1..] {
            let c = self.cache.centered_column(j);
            for (w, v) in s.prefix_product.iter_mut().zip(c) {
                *w *= v;
            }
            s.prefix_sd *= self.x_sd[j];
        }
        for m in 0..self.q {
            let y = &self.y_cumulant[m * n..(m + 1) * n];
            let out = &mut s.weighted[m * n..(m + 1) * n];
            for ((o, w), v) in out.iter_mut().zip(&s.prefix_product).zip(y) {
                *o = w * v;
            }
        }
    }

    /// First row of H for the prepared prefix extended by `last`.
    #[inline]
    pub fn interaction_row<'s>(&self, last: usize, s: &'s mut Scratch) -> &'s [f64] {
        let n = self.n;
        let x = self.cache.centered_column(last);
        let denom = s.prefix_sd * self.x_sd[last];
        for m in 0..self.q {
            s.h[m] = dot(x, &s.weighted[m * n..(m + 1) * n]) / denom;
        }
        &s.h
    }

    /// Scan-route utility of a single tuple (r = 1 uses the marginal row).
    pub fn tuple_utility(&self, tuple: &[usize], norm: NormSpec) -> Result<f64> {
        validate_tuple(tuple, self.cache.p())?;
        if let Some(&j) = tuple.iter().find(|&&j| self.cache.is_degenerate(j)) {
            return Err(Error::DegenerateFeature { index: j });
        }
        let base = self.base_sum(norm);
        let mut s = self.scratch();
        if tuple.len() == 1 {
            let mut h = vec![0.0; self.q];
            self.marginal_row(tuple[0], &mut h);
            return Ok(Self::utility_from_row(base, norm, &h));
        }
        let (prefix, last) = tuple.split_at(tuple.len() - 1);
        self.prepare_prefix(prefix, &mut s);
        let h = self.interaction_row(last[0], &mut s);
        Ok(Self::utility_from_row(base, norm, h))
    }

    /// Visits every r-tuple of active predictors. Tuples sharing an (r−1)
    /// prefix are visited together; prefixes are processed in parallel.
    fn fold_tuples<A, F, R>(&self, r: usize, init: impl Fn() -> A + Sync + Send, visit: F, reduce: R) -> A
    where
        A: Send,
        F: Fn(&mut A, &[usize], usize, &[f64]) + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        let m = self.active.len();
        let prefixes = binomial(m, r - 1);
        let prefix_count = u64::try_from(prefixes).expect("prefix count fits in u64");
        (0..prefix_count)
            .into_par_iter()
            .fold(
                || (init(), self.scratch(), Vec::with_capacity(r)),
                |(mut acc, mut s, mut tuple), rank| {
                    let pos = unrank_combination(rank as u128, m, r - 1);
                    let start = pos.last().map_or(0, |&p| p + 1);
                    if start >= m {
                        return (acc, s, tuple);
                    }
                    tuple.clear();
                    tuple.extend(pos.iter().map(|&p| self.active[p]));
                    self.prepare_prefix(&tuple, &mut s);
                    tuple.push(0);
                    for &last in &self.active[start..] {
                        let h = self.interaction_row(last, &mut s);
                        *tuple.last_mut().unwrap() = last;
                        visit(&mut acc, &tuple, last, h);
                    }
                    (acc, s, tuple)
                },
            )
            .map(|(acc, _, _)| acc)
            .reduce(&init, &reduce)
    }
}

/// Knobs for interaction scans.
#[derive(Debug, Clone, Copy)]
pub struct InteractionOptions {
    pub top_k: usize,
    pub enumeration_budget: u128,
}

impl InteractionOptions {
    pub fn top_k(top_k: usize) -> Self {
        Self {
            top_k,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

fn meta(cache: &MomentCache, candidates: u128) -> ScreenMeta {
    ScreenMeta {
        n: cache.n(),
        p: cache.p(),
        q: cache.q(),
        candidates,
        degenerate: cache.degenerate_columns().to_vec(),
    }
}

/// Marginal GenCorr screen over every non-degenerate predictor.
pub fn screen_marginal(data: &Dataset, norm: NormSpec) -> Result<ScreenReport> {
    let cache = build_moment_cache(data, DEFAULT_VAR_TOLERANCE)?;
    screen_marginal_cached(&cache, norm)
}

pub fn screen_marginal_cached(cache: &MomentCache, norm: NormSpec) -> Result<ScreenReport> {
    let mut reports = screen_marginal_multi(cache, &[norm])?;
    Ok(reports.pop().expect("one norm in, one report out"))
}

/// Marginal screens for several norms sharing one pass over the data.
pub fn screen_marginal_multi(cache: &MomentCache, norms: &[NormSpec]) -> Result<Vec<ScreenReport>> {
    let kernel = ScanKernel::new(cache);
    if kernel.active.is_empty() {
        return Err(Error::NoCandidates("every predictor is degenerate".into()));
    }
    let bases: Vec<f64> = norms.iter().map(|&nm| kernel.base_sum(nm)).collect();
    let q = cache.q();
    let values: Vec<Vec<f64>> = kernel
        .active
        .par_iter()
        .map_init(
            || vec![0.0; q],
            |h, &j| {
                kernel.marginal_row(j, h);
                norms
                    .iter()
                    .zip(&bases)
                    .map(|(&nm, &b)| ScanKernel::utility_from_row(b, nm, h))
                    .collect()
            },
        )
        .collect();
    Ok(norms
        .iter()
        .enumerate()
        .map(|(k, &nm)| {
            let scores = kernel
                .active
                .iter()
                .zip(&values)
                .map(|(&j, v)| UtilityScore::new(vec![j], v[k]))
                .collect();
            ScreenReport::new(
                scores,
                Method::GenCorr(nm),
                1,
                meta(cache, kernel.active.len() as u128),
            )
        })
        .collect())
}

/// Top-`top_k` r-way interactions by GenCorr utility.
pub fn screen_interactions(data: &Dataset, r: usize, norm: NormSpec, top_k: usize) -> Result<ScreenReport> {
    let cache = build_moment_cache(data, DEFAULT_VAR_TOLERANCE)?;
    screen_interactions_cached(&cache, r, norm, InteractionOptions::top_k(top_k))
}

/// Streaming interaction scan. Memory is bounded by the best-k buffers held
/// by live workers, never by the candidate count.
pub fn screen_interactions_cached(
    cache: &MomentCache,
    r: usize,
    norm: NormSpec,
    opts: InteractionOptions,
) -> Result<ScreenReport> {
    if r < 2 {
        return Err(Error::invalid(format!("interaction order must be >= 2, got {r}")));
    }
    if opts.top_k == 0 {
        return Err(Error::invalid("top_k must be at least 1"));
    }
    let kernel = ScanKernel::new(cache);
    let m = kernel.active.len();
    if m < r {
        return Err(Error::NoCandidates(format!(
            "{m} non-degenerate predictors for order-{r} interactions"
        )));
    }
    let candidates = binomial(m, r);
    if candidates > opts.enumeration_budget {
        log::warn!(
            "order-{r} scan over {m} predictors enumerates {candidates} tuples (budget {})",
            opts.enumeration_budget
        );
    }
    let base = kernel.base_sum(norm);
    let k = opts.top_k;
    let best = kernel.fold_tuples(
        r,
        || TopK::new(k),
        |top, tuple, _, h| {
            let v = ScanKernel::utility_from_row(base, norm, h);
            top.offer(v, tuple);
        },
        TopK::merge,
    );
    Ok(ScreenReport::new(
        best.into_sorted_vec(),
        Method::GenCorr(norm),
        r,
        meta(cache, candidates),
    ))
}

/// Exact 1-based ranks of `targets` among all r-tuples, for each norm,
/// without materializing a report. Result is indexed `[norm][target]`.
pub fn interaction_ranks(
    cache: &MomentCache,
    r: usize,
    norms: &[NormSpec],
    targets: &[Vec<usize>],
) -> Result<Vec<Vec<u64>>> {
    if r < 2 {
        return Err(Error::invalid(format!("interaction order must be >= 2, got {r}")));
    }
    let kernel = ScanKernel::new(cache);
    for t in targets {
        if t.len() != r {
            return Err(Error::invalid(format!("target {t:?} is not an order-{r} tuple")));
        }
    }
    let target_values: Vec<Vec<f64>> = norms
        .iter()
        .map(|&nm| targets.iter().map(|t| kernel.tuple_utility(t, nm)).collect())
        .collect::<Result<_>>()?;
    let bases: Vec<f64> = norms.iter().map(|&nm| kernel.base_sum(nm)).collect();
    let slots = norms.len() * targets.len();
    let ahead = kernel.fold_tuples(
        r,
        || vec![0u64; slots],
        |acc, tuple, _, h| {
            for (a, (&nm, &b)) in norms.iter().zip(&bases).enumerate() {
                let v = ScanKernel::utility_from_row(b, nm, h);
                for (t, target) in targets.iter().enumerate() {
                    let tv = target_values[a][t];
                    if rank_order_parts(v, tuple, tv, target) == std::cmp::Ordering::Less {
                        acc[a * targets.len() + t] += 1;
                    }
                }
            }
        },
        |mut x, y| {
            for (a, b) in x.iter_mut().zip(y) {
                *a += b;
            }
            x
        },
    );
    Ok((0..norms.len())
        .map(|a| {
            (0..targets.len())
                .map(|t| ahead[a * targets.len() + t] + 1)
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::sample_variance;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, p: usize, q: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
        let y = Array2::from_shape_fn((n, q), |_| rng.random_range(-2.0..2.0));
        Dataset::new(x, y).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn sigma_marginal_identical_columns() {
        let x = array![[1.0], [3.0], [2.0], [6.0]];
        let d = Dataset::new(x.clone(), x).unwrap();
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let s = build_sigma_marginal(0, &c, &d).unwrap();
        let v = sample_variance(d.x_col(0)).unwrap();
        for e in s.iter() {
            assert!(rel(*e, v) < 1e-15);
        }
    }

    #[test]
    fn sigma_marginal_orthogonal_block_is_zero() {
        // x sums to zero against each centered y column.
        let x = array![[1.0], [-1.0], [1.0], [-1.0]];
        let y = array![[1.0, 2.0], [1.0, 2.0], [3.0, 5.0], [3.0, 5.0]];
        let d = Dataset::new(x, y).unwrap();
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let s = build_sigma_marginal(0, &c, &d).unwrap();
        assert_eq!(s[[0, 1]], 0.0);
        assert_eq!(s[[0, 2]], 0.0);
        assert_eq!(s[[2, 0]], 0.0);
    }

    #[test]
    fn sigma_marginal_matches_per_entry_formula() {
        for q in [1, 3] {
            let d = random_data(8, 2, q, 11 + q as u64);
            let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
            let s = build_sigma_marginal(1, &c, &d).unwrap();
            let xs: Vec<f64> = d.x_col(1).to_vec();
            let xm = xs.iter().sum::<f64>() / 8.0;
            for m in 0..q {
                let ys: Vec<f64> = d.y_col(m).to_vec();
                let ym = ys.iter().sum::<f64>() / 8.0;
                let mut acc = 0.0;
                for i in 0..8 {
                    acc += (xs[i] - xm) * (ys[i] - ym);
                }
                assert!(rel(s[[0, m + 1]], acc / 7.0) < 1e-13);
            }
            assert!(rel(s[[0, 0]], xs.iter().map(|v| (v - xm).powi(2)).sum::<f64>() / 7.0) < 1e-13);
        }
    }

    #[test]
    fn sigma_interaction_constant_response_and_degenerate_member() {
        let x = array![[1.0, 2.0, 5.0], [0.0, -1.0, 5.0], [3.0, 1.0, 5.0], [2.0, 0.5, 5.0]];
        let y = array![[1.0, 4.0], [2.0, 4.0 + 1e-9], [0.5, 4.0], [7.0, 4.0]];
        let d = Dataset::new(x, y).unwrap();
        let c = build_moment_cache(&d, 0.0).unwrap();
        assert!(matches!(
            build_sigma_interaction(&[0, 2], &c, &d),
            Err(Error::DegenerateFeature { index: 2 })
        ));
        assert!(build_sigma_interaction(&[1], &c, &d).is_err());
        assert!(build_sigma_interaction(&[1, 0], &c, &d).is_err());
    }

    #[test]
    fn sigma_interaction_matches_cumulant_oracle() {
        let d = random_data(6, 3, 2, 5);
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let s = build_sigma_interaction(&[0, 2], &c, &d).unwrap();
        let col = |j: usize| -> Vec<f64> { d.x_col(j).to_vec() };
        let (a, b) = (col(0), col(2));
        let e = |v: &[f64]| v.iter().sum::<f64>() / 6.0;
        for m in 0..2 {
            let y: Vec<f64> = d.y_col(m).to_vec();
            let prod3: Vec<f64> = (0..6).map(|i| a[i] * b[i] * y[i]).collect();
            let ab: Vec<f64> = (0..6).map(|i| a[i] * b[i]).collect();
            let ay: Vec<f64> = (0..6).map(|i| a[i] * y[i]).collect();
            let by: Vec<f64> = (0..6).map(|i| b[i] * y[i]).collect();
            let (ma, mb, my) = (e(&a), e(&b), e(&y));
            let k3 = e(&prod3) - ma * e(&by) - mb * e(&ay) - my * e(&ab) + 2.0 * ma * mb * my;
            assert!(rel(s[[0, m + 1]], k3) < 1e-11, "{} vs {k3}", s[[0, m + 1]]);
        }
        assert!(rel(s[[0, 0]], c.x_vars()[0] * c.x_vars()[2]) < 1e-15);
    }

    #[test]
    fn h_matrix_examples() {
        let id = Array2::<f64>::eye(3);
        assert_eq!(h_matrix(&id).unwrap(), id);
        let s = array![[4.0, 3.0], [3.0, 9.0]];
        let h = h_matrix(&s).unwrap();
        assert_eq!(h, array![[1.0, 0.5], [0.5, 1.0]]);
        assert!(h_matrix(&array![[0.0, 1.0], [1.0, 2.0]]).is_err());
    }

    #[test]
    fn utility_perfect_fit_and_identity() {
        let ones = array![[1.0, 1.0], [1.0, 1.0]];
        assert_eq!(utility(&ones, NormSpec::FROBENIUS), 2.0);
        assert_eq!(utility(&ones, NormSpec::TAXICAB), 4.0);
        let id = Array2::<f64>::eye(4);
        assert!(rel(utility(&id, NormSpec::FROBENIUS), 2.0) < 1e-15);
    }

    #[test]
    fn scan_route_matches_reference_route() {
        let d = random_data(30, 6, 3, 99);
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let k = ScanKernel::new(&c);
        for norm in [NormSpec::TAXICAB, NormSpec::FROBENIUS, NormSpec::new(3.0).unwrap()] {
            for j in 0..6 {
                let reference = utility(&h_matrix(&build_sigma_marginal(j, &c, &d).unwrap()).unwrap(), norm);
                assert!(rel(k.tuple_utility(&[j], norm).unwrap(), reference) < 1e-12);
            }
            for t in [vec![0, 1], vec![2, 5], vec![1, 3, 4]] {
                let reference =
                    utility(&h_matrix(&build_sigma_interaction(&t, &c, &d).unwrap()).unwrap(), norm);
                assert!(rel(k.tuple_utility(&t, norm).unwrap(), reference) < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_single_predictor() {
        let d = random_data(10, 1, 2, 3);
        let r = screen_marginal(&d, NormSpec::FROBENIUS).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.scores()[0].indices, vec![0]);
    }

    #[test]
    fn marginal_all_degenerate_is_error() {
        let x = Array2::from_elem((5, 3), 2.0);
        let y = array![[1.0], [2.0], [0.0], [3.0], [1.5]];
        let d = Dataset::new(x, y).unwrap();
        assert!(matches!(screen_marginal(&d, NormSpec::FROBENIUS), Err(Error::NoCandidates(_))));
    }

    #[test]
    fn marginal_skips_degenerate_and_records_them() {
        let mut d = random_data(12, 4, 2, 8);
        let mut x = d.x().clone();
        x.column_mut(2).fill(1.25);
        d = d.with_predictors(x).unwrap();
        let r = screen_marginal(&d, NormSpec::TAXICAB).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.meta().degenerate, vec![2]);
        assert!(r.scores().iter().all(|s| s.indices != vec![2]));
    }

    #[test]
    fn marginal_matches_oracle_sort() {
        let d = random_data(25, 20, 3, 17);
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let report = screen_marginal(&d, NormSpec::FROBENIUS).unwrap();
        let mut oracle: Vec<(usize, f64)> = (0..20)
            .map(|j| {
                let h = h_matrix(&build_sigma_marginal(j, &c, &d).unwrap()).unwrap();
                (j, utility(&h, NormSpec::FROBENIUS))
            })
            .collect();
        oracle.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let got: Vec<usize> = report.scores().iter().map(|s| s.indices[0]).collect();
        let want: Vec<usize> = oracle.iter().map(|o| o.0).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn interactions_tiny_full_sort() {
        let d = random_data(15, 3, 2, 4);
        let r = screen_interactions(&d, 2, NormSpec::FROBENIUS, 10).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.meta().candidates, 3);
        assert!(!r.is_truncated());
    }

    #[test]
    fn interactions_match_exhaustive_oracle() {
        let d = random_data(20, 40, 2, 21);
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let k = ScanKernel::new(&c);
        let report = screen_interactions(&d, 2, NormSpec::FROBENIUS, 50).unwrap();
        let mut all = Vec::new();
        for a in 0..40 {
            for b in a + 1..40 {
                all.push(UtilityScore::new(vec![a, b], k.tuple_utility(&[a, b], NormSpec::FROBENIUS).unwrap()));
            }
        }
        assert_eq!(all.len(), 780);
        all.sort_by(crate::report::rank_order);
        all.truncate(50);
        assert_eq!(report.scores(), &all[..]);
    }

    #[test]
    fn interaction_argument_errors() {
        let d = random_data(10, 3, 1, 2);
        assert!(screen_interactions(&d, 1, NormSpec::FROBENIUS, 5).is_err());
        assert!(screen_interactions(&d, 2, NormSpec::FROBENIUS, 0).is_err());
        assert!(matches!(
            screen_interactions(&d, 4, NormSpec::FROBENIUS, 5),
            Err(Error::NoCandidates(_))
        ));
    }

    #[test]
    fn counted_ranks_match_report_ranks() {
        let d = random_data(20, 15, 3, 31);
        let c = build_moment_cache(&d, DEFAULT_VAR_TOLERANCE).unwrap();
        let targets = vec![vec![0, 1], vec![3, 7], vec![13, 14]];
        let norms = [NormSpec::TAXICAB, NormSpec::FROBENIUS];
        let ranks = interaction_ranks(&c, 2, &norms, &targets).unwrap();
        for (a, &nm) in norms.iter().enumerate() {
            let full = screen_interactions_cached(&c, 2, nm, InteractionOptions::top_k(1000)).unwrap();
            for (t, target) in targets.iter().enumerate() {
                assert_eq!(
                    ranks[a][t] as usize,
                    crate::report::rank_of(&full, target).unwrap()
                );
            }
        }
    }
}
