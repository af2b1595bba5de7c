//! Sample moments, joint cumulants, and the precomputed [`MomentCache`].
//!
//! Variances and covariances use divisor n−1; joint cumulants use divisor n.
//! The two conventions are kept as-is, so at r = 1 the cumulant equals
//! ((n−1)/n) times the covariance. Sums run in ascending index order.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default relative variance tolerance: a column is degenerate when its
/// variance is at most this multiple of its mean square.
pub const DEFAULT_VAR_TOLERANCE: f64 = 1e-12;

pub fn mean(v: ArrayView1<'_, f64>) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sample_variance(column: ArrayView1<'_, f64>) -> Result<f64> {
    let n = column.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "sample variance needs at least 2 observations, got {n}"
        )));
    }
    let m = mean(column);
    let ss: f64 = column.iter().map(|&v| (v - m) * (v - m)).sum();
    Ok(ss / (n - 1) as f64)
}

pub fn sample_covariance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "covariance of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "sample covariance needs at least 2 observations, got {n}"
        )));
    }
    let (ma, mb) = (mean(a), mean(b));
    // (a-ā)(b-b̄) is commutative per term, so swapping arguments is exact.
    let s: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(&u, &v)| (u - ma) * (v - mb))
        .sum();
    Ok(s / (n - 1) as f64)
}

/// q×q sample covariance matrix of the response columns.
pub fn y_covariance_matrix(y: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let q = y.ncols();
    let mut out = Array2::zeros((q, q));
    for l in 0..q {
        for m in l..q {
            let c = sample_covariance(y.column(l), y.column(m))?;
            out[[l, m]] = c;
            out[[m, l]] = c;
        }
    }
    Ok(out)
}

/// Joint cumulant estimate κ̂_{r+1}(y, x_1, …, x_r), divisor n.
pub fn joint_cumulant_hat(y_col: ArrayView1<'_, f64>, x_cols: &[ArrayView1<'_, f64>]) -> Result<f64> {
    if x_cols.is_empty() {
        return Err(Error::invalid("joint cumulant needs at least one predictor column"));
    }
    let n = y_col.len();
    if n == 0 {
        return Err(Error::invalid("joint cumulant of empty vectors"));
    }
    if let Some(bad) = x_cols.iter().find(|c| c.len() != n) {
        return Err(Error::invalid(format!(
            "joint cumulant inputs have lengths {} and {}",
            n,
            bad.len()
        )));
    }
    let y_mean = mean(y_col);
    let x_means: Vec<f64> = x_cols.iter().map(|c| mean(*c)).collect();
    let mut total = 0.0;
    for i in 0..n {
        let mut term = 1.0;
        for (c, m) in x_cols.iter().zip(&x_means) {
            term *= c[i] - m;
        }
        total += term * (y_col[i] - y_mean);
    }
    Ok(total / n as f64)
}

/// (q+1) + Σ_{ℓ≠m} ρ̂²_{ℓm}, computed as 1 + Σ_{ℓ,m} ρ̂²_{ℓm}, which agrees
/// whenever the diagonal is exactly 1.
pub fn gamma_hat(y_corr: ArrayView2<'_, f64>) -> f64 {
    1.0 + y_corr.iter().map(|r| r * r).sum::<f64>()
}

/// Sample moments shared by every screen over one dataset. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct MomentCache {
    n: usize,
    x_means: Array1<f64>,
    y_means: Array1<f64>,
    x_vars: Array1<f64>,
    y_vars: Array1<f64>,
    /// Column-major, so every predictor column is a contiguous slice.
    x_centered: Array2<f64>,
    y_centered: Array2<f64>,
    y_cov: Array2<f64>,
    y_corr: Array2<f64>,
    gamma_hat: f64,
    degenerate: Vec<bool>,
    degenerate_columns: Vec<usize>,
}

struct ColumnMoments {
    mean: f64,
    var: f64,
    degenerate: bool,
    centered: Vec<f64>,
}

fn column_moments(col: ArrayView1<'_, f64>, rel_tol: f64) -> ColumnMoments {
    let n = col.len();
    let m = mean(col);
    let centered: Vec<f64> = col.iter().map(|&v| v - m).collect();
    let var = centered.iter().map(|d| d * d).sum::<f64>() / (n - 1) as f64;
    let mean_sq = col.iter().map(|v| v * v).sum::<f64>() / n as f64;
    ColumnMoments {
        mean: m,
        var,
        degenerate: !(var > rel_tol * mean_sq) || var == 0.0,
        centered,
    }
}

/// Precompute means, variances, centered columns and response correlation.
///
/// `var_tolerance` is relative: a column whose sample variance is at most
/// `var_tolerance` times its mean square counts as constant. Degenerate
/// predictors are recorded; a degenerate response component is fatal.
pub fn build_moment_cache(data: &Dataset, var_tolerance: f64) -> Result<MomentCache> {
    if !(var_tolerance >= 0.0) || !var_tolerance.is_finite() {
        return Err(Error::invalid(format!(
            "variance tolerance must be finite and nonnegative, got {var_tolerance}"
        )));
    }
    let (n, p, q) = (data.n(), data.p(), data.q());

    let y_stats: Vec<ColumnMoments> = (0..q)
        .map(|m| column_moments(data.y_col(m), var_tolerance))
        .collect();
    if let Some(m) = y_stats.iter().position(|c| c.degenerate) {
        return Err(Error::DegenerateResponse { component: m });
    }

    let x_stats: Vec<ColumnMoments> = (0..p)
        .into_par_iter()
        .map(|j| column_moments(data.x_col(j), var_tolerance))
        .collect();

    let mut flat = Vec::with_capacity(n * p);
    for c in &x_stats {
        flat.extend_from_slice(&c.centered);
    }
    let x_centered = Array2::from_shape_vec((n, p).f(), flat).expect("shape matches");

    let mut y_centered = Array2::zeros((n, q));
    for (m, c) in y_stats.iter().enumerate() {
        for i in 0..n {
            y_centered[[i, m]] = c.centered[i];
        }
    }

    let y_cov = y_covariance_matrix(data.y().view())?;
    let y_vars: Array1<f64> = y_stats.iter().map(|c| c.var).collect();
    let y_sd: Vec<f64> = y_vars.iter().map(|v| v.sqrt()).collect();
    let mut y_corr = Array2::zeros((q, q));
    for l in 0..q {
        for m in 0..q {
            y_corr[[l, m]] = if l == m {
                1.0
            } else {
                y_cov[[l, m]] / (y_sd[l] * y_sd[m])
            };
        }
    }
    let gamma = gamma_hat(y_corr.view());

    let degenerate: Vec<bool> = x_stats.iter().map(|c| c.degenerate).collect();
    let degenerate_columns = degenerate
        .iter()
        .enumerate()
        .filter_map(|(j, &d)| d.then_some(j))
        .collect();

    Ok(MomentCache {
        n,
        x_means: x_stats.iter().map(|c| c.mean).collect(),
        y_means: y_stats.iter().map(|c| c.mean).collect(),
        x_vars: x_stats.iter().map(|c| c.var).collect(),
        y_vars,
        x_centered,
        y_centered,
        y_cov,
        y_corr,
        gamma_hat: gamma,
        degenerate,
        degenerate_columns,
    })
}

impl MomentCache {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.x_vars.len()
    }

    pub fn q(&self) -> usize {
        self.y_vars.len()
    }

    pub fn x_means(&self) -> &Array1<f64> {
        &self.x_means
    }

    pub fn y_means(&self) -> &Array1<f64> {
        &self.y_means
    }

    pub fn x_vars(&self) -> &Array1<f64> {
        &self.x_vars
    }

    pub fn y_vars(&self) -> &Array1<f64> {
        &self.y_vars
    }

    pub fn x_centered(&self) -> &Array2<f64> {
        &self.x_centered
    }

    pub fn y_centered(&self) -> &Array2<f64> {
        &self.y_centered
    }

    pub fn y_cov(&self) -> &Array2<f64> {
        &self.y_cov
    }

    pub fn y_corr(&self) -> &Array2<f64> {
        &self.y_corr
    }

    pub fn gamma_hat(&self) -> f64 {
        self.gamma_hat
    }

    pub fn degenerate_columns(&self) -> &[usize] {
        &self.degenerate_columns
    }

    pub fn is_degenerate(&self, j: usize) -> bool {
        self.degenerate[j]
    }

    /// Indices of the predictors that take part in screening.
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| !self.degenerate[j]).collect()
    }

    /// Contiguous centered predictor column.
    pub fn centered_column(&self, j: usize) -> &[f64] {
        let n = self.n;
        let flat = self
            .x_centered
            .as_slice_memory_order()
            .expect("x_centered is contiguous");
        &flat[j * n..(j + 1) * n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn variance_examples() {
        assert_eq!(sample_variance(array![5.0, 5.0, 5.0, 5.0].view()).unwrap(), 0.0);
        assert_eq!(sample_variance(array![1.0, 2.0, 3.0].view()).unwrap(), 1.0);
        assert_eq!(sample_variance(array![0.0, 2.0].view()).unwrap(), 2.0);
        assert!(sample_variance(array![1.0].view()).is_err());
    }

    #[test]
    fn covariance_examples() {
        let a = array![1.0, 2.0, 3.0];
        assert_eq!(sample_covariance(a.view(), a.view()).unwrap(), 1.0);
        assert_eq!(
            sample_covariance(a.view(), array![3.0, 2.0, 1.0].view()).unwrap(),
            -1.0
        );
        assert_eq!(
            sample_covariance(array![0.3, -2.0, 7.5, 1.0].view(), array![4.0, 4.0, 4.0, 4.0].view())
                .unwrap(),
            0.0
        );
        assert!(sample_covariance(a.view(), array![1.0, 2.0].view()).is_err());
    }

    #[test]
    fn y_covariance_degenerate_and_duplicate() {
        let y = array![[1.0], [4.0], [2.0], [8.0]];
        let c = y_covariance_matrix(y.view()).unwrap();
        assert_eq!(c[[0, 0]], sample_variance(y.column(0)).unwrap());

        let y = array![[1.0, 1.0], [4.0, 4.0], [2.0, 2.0]];
        let c = y_covariance_matrix(y.view()).unwrap();
        assert!(c.iter().all(|&v| v == c[[0, 0]]));
    }

    #[test]
    fn y_covariance_matches_per_entry_formula() {
        let y = array![
            [0.3, -1.2, 2.0],
            [1.7, 0.4, -0.5],
            [-0.9, 2.2, 1.1],
            [2.5, -0.3, 0.0],
            [0.1, 1.0, -2.4]
        ];
        let c = y_covariance_matrix(y.view()).unwrap();
        let n = 5.0;
        for l in 0..3 {
            for m in 0..3 {
                let ml = y.column(l).sum() / n;
                let mm = y.column(m).sum() / n;
                let mut s = 0.0;
                for i in 0..5 {
                    s += (y[[i, l]] - ml) * (y[[i, m]] - mm);
                }
                assert!(close(c[[l, m]], s / (n - 1.0), 1e-14));
            }
        }
    }

    #[test]
    fn cumulant_examples() {
        let x = array![1.0, 2.0, 3.0];
        let yc = array![2.0, 2.0, 2.0];
        assert_eq!(joint_cumulant_hat(yc.view(), &[x.view(), x.view()]).unwrap(), 0.0);
        let k = joint_cumulant_hat(x.view(), &[x.view()]).unwrap();
        assert!(close(k, 2.0 / 3.0, 1e-15));
        assert!(joint_cumulant_hat(x.view(), &[]).is_err());
    }

    #[test]
    fn cumulant_r2_matches_term_expansion() {
        // Centered triple product expanded into raw moments:
        // E[abc] - ā E[bc] - b̄ E[ac] - c̄ E[ab] + 2 ā b̄ c̄
        let a = array![0.5, -1.0, 2.0, 3.5];
        let b = array![1.0, 0.0, -2.0, 0.7];
        let y = array![2.2, -0.4, 1.3, 0.9];
        let e = |v: Array1<f64>| v.sum() / 4.0;
        let (ma, mb, my) = (e(a.clone()), e(b.clone()), e(y.clone()));
        let expected = e(&a * &b * &y) - ma * e(&b * &y) - mb * e(&a * &y) - my * e(&a * &b)
            + 2.0 * ma * mb * my;
        let k = joint_cumulant_hat(y.view(), &[a.view(), b.view()]).unwrap();
        assert!(close(k, expected, 1e-13), "{k} vs {expected}");
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_hat(array![[1.0, 0.0], [0.0, 1.0]].view()), 3.0);
        assert_eq!(gamma_hat(array![[1.0, 0.5], [0.5, 1.0]].view()), 3.5);
        let r = array![[1.0, 0.3, -0.2], [0.3, 1.0, 0.6], [-0.2, 0.6, 1.0]];
        let frob_sq: f64 = r.iter().map(|v| v * v).sum();
        assert!(close(gamma_hat(r.view()), 1.0 + frob_sq, 1e-15));
        let off: f64 = 2.0 * (0.09 + 0.04 + 0.36);
        assert!(close(gamma_hat(r.view()), 4.0 + off, 1e-15));
    }

    #[test]
    fn cache_flags_constant_predictor() {
        let x = array![[1.0, 3.0, 0.2], [2.0, 3.0, -1.0], [0.5, 3.0, 4.0], [4.0, 3.0, 1.0]];
        let y = array![[1.0], [0.0], [2.0], [5.0]];
        let cache = build_moment_cache(&Dataset::new(x, y).unwrap(), DEFAULT_VAR_TOLERANCE).unwrap();
        assert_eq!(cache.degenerate_columns(), &[1]);
        assert_eq!(cache.active_columns(), vec![0, 2]);
    }

    #[test]
    fn cache_rejects_constant_response() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![[1.0, 7.0], [2.0, 7.0], [0.0, 7.0]];
        let err = build_moment_cache(&Dataset::new(x, y).unwrap(), DEFAULT_VAR_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::DegenerateResponse { component: 1 }));
    }

    #[test]
    fn cache_duplicate_response_gamma() {
        let x = array![[1.0], [2.0], [3.0], [0.0]];
        let y = array![[1.0, 1.0], [4.0, 4.0], [2.0, 2.0], [9.0, 9.0]];
        let cache = build_moment_cache(&Dataset::new(x, y).unwrap(), DEFAULT_VAR_TOLERANCE).unwrap();
        assert!(close(cache.y_corr()[[0, 1]], 1.0, 1e-15));
        assert!(close(cache.gamma_hat(), 3.0 + 2.0, 1e-14));
    }

    #[test]
    fn cache_fields_match_recomputation() {
        let x = array![
            [0.1, 2.0, -1.0, 4.0],
            [1.3, -0.5, 0.0, 2.0],
            [-0.7, 1.1, 3.2, 0.5],
            [2.2, 0.0, -2.1, 1.0],
            [0.4, 0.9, 0.8, -3.0],
            [-1.5, 3.3, 1.4, 0.2],
            [0.0, -1.2, -0.3, 2.5],
            [1.1, 0.6, 2.6, -1.1],
            [0.8, -2.2, -0.9, 0.7],
            [-0.2, 1.5, 0.1, 1.9]
        ];
        let y = array![
            [1.0, 0.2],
            [0.5, -1.0],
            [2.0, 0.3],
            [-1.0, 1.5],
            [0.3, 0.0],
            [1.2, -0.7],
            [-0.4, 2.1],
            [0.9, 0.6],
            [0.0, -0.2],
            [1.7, 1.1]
        ];
        let data = Dataset::new(x.clone(), y.clone()).unwrap();
        let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE).unwrap();
        for j in 0..4 {
            let col = x.column(j);
            assert!(close(cache.x_means()[j], col.sum() / 10.0, 1e-15));
            assert!(close(cache.x_vars()[j], sample_variance(col).unwrap(), 1e-15));
            for i in 0..10 {
                assert!(close(cache.centered_column(j)[i], x[[i, j]] - col.sum() / 10.0, 1e-15));
                assert_eq!(cache.x_centered()[[i, j]], cache.centered_column(j)[i]);
            }
        }
        let cov = y_covariance_matrix(y.view()).unwrap();
        let rho = cov[[0, 1]] / (cov[[0, 0]] * cov[[1, 1]]).sqrt();
        assert!(close(cache.y_corr()[[0, 1]], rho, 1e-14));
        assert_eq!(cache.y_corr()[[0, 0]], 1.0);
        assert!(close(cache.gamma_hat(), 3.0 + 2.0 * rho * rho, 1e-14));
        assert!(cache.gamma_hat() >= 3.0);
    }
}
