//! Stage-one real-data workflow: iterative marginal screening with residual
//! projection, a direct top-d interaction scan, and sAICc scoring of
//! externally fitted candidate models.

use nalgebra::DMatrix;
use ndarray::{s, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::moments::{build_moment_cache, DEFAULT_VAR_TOLERANCE};
use crate::norm::NormSpec;
use crate::report::{ScreenReport, UtilityScore};
use crate::screen::{screen_interactions_cached, screen_marginal, InteractionOptions};

/// Residual columns shorter than this fraction of the original column are
/// treated as lying in the span of the first-pass predictors.
const SPAN_TOLERANCE: f64 = 1e-8;

/// d = 2·[n / ln n] with [·] rounding half up.
pub fn default_d(n: usize) -> usize {
    let ratio = n as f64 / (n as f64).ln();
    2 * (ratio + 0.5).floor() as usize
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub d: usize,
    pub split_fraction: f64,
    pub split_seed: u64,
    pub norm: NormSpec,
    pub interaction_budget: usize,
    /// Singular values below this fraction of the largest are dropped.
    pub pseudo_inverse_tolerance: f64,
}

impl PipelineConfig {
    pub fn for_sample_size(n: usize, split_seed: u64) -> Self {
        let d = default_d(n);
        Self {
            d,
            split_fraction: 0.75,
            split_seed,
            norm: NormSpec::FROBENIUS,
            interaction_budget: d,
            pseudo_inverse_tolerance: 1e-10,
        }
    }

    pub fn validate(&self, n: usize, q: usize) -> Result<()> {
        if self.d < 2 || self.d >= n {
            return Err(Error::Config(format!("d must satisfy 2 <= d < n (d = {}, n = {n})", self.d)));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split fraction {} outside (0, 1)",
                self.split_fraction
            )));
        }
        let (_, valid) = split_sizes(n, self.split_fraction);
        if valid < q + 2 {
            return Err(Error::Config(format!(
                "validation split has {valid} rows, need at least q + 2 = {}",
                q + 2
            )));
        }
        if self.interaction_budget == 0 {
            return Err(Error::Config("interaction budget must be at least 1".into()));
        }
        if !(self.pseudo_inverse_tolerance >= 0.0) {
            return Err(Error::Config("pseudo-inverse tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

fn split_sizes(n: usize, fraction: f64) -> (usize, usize) {
    let train = (fraction * n as f64).floor() as usize;
    (train, n - train)
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Moore–Penrose pseudo-inverse via SVD, dropping singular values at or
/// below `rel_tol` times the largest.
pub fn pseudo_inverse(a: &Array2<f64>, rel_tol: f64) -> Array2<f64> {
    if a.is_empty() {
        return Array2::zeros((a.ncols(), a.nrows()));
    }
    let svd = to_na(a).svd(true, true);
    let max_sv = svd.singular_values.max();
    let cutoff = (rel_tol * max_sv).max(f64::MIN_POSITIVE);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cutoff {
            out += (vt.row(k).transpose() * u.column(k).transpose()) / sv;
        }
    }
    from_na(&out)
}

/// Least-squares coefficients of `y` on `x` via the normal equations with a
/// pseudo-inverse, so rank-deficient designs never abort.
pub fn least_squares(x: &Array2<f64>, y: &Array2<f64>, rel_tol: f64) -> Array2<f64> {
    let xtx = x.t().dot(x);
    let xty = x.t().dot(y);
    pseudo_inverse(&xtx, rel_tol).dot(&xty)
}

/// (I − X₁(X₁′X₁)†X₁′)·X₁ᶜ: residuals of each X₁ᶜ column regressed on X₁.
pub fn residualize(x1: &Array2<f64>, x1c: &Array2<f64>, tol: f64) -> Result<Array2<f64>> {
    if x1.nrows() != x1c.nrows() {
        return Err(Error::RowMismatch {
            x_rows: x1.nrows(),
            y_rows: x1c.nrows(),
        });
    }
    if x1.ncols() == 0 {
        return Ok(x1c.clone());
    }
    let coef = least_squares(x1, x1c, tol);
    Ok(x1c - &x1.dot(&coef))
}

fn with_intercept(x: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::ones((x.nrows(), x.ncols() + 1));
    out.slice_mut(s![.., 1..]).assign(x);
    out
}

/// Validation MSPE for every p₁ in 2..d, using one seeded 75/25 split shared
/// by all p₁ values. Fits include an intercept.
pub fn mspe_curve(data: &Dataset, ranked: &[usize], d: usize, split_seed: u64, split_fraction: f64, tol: f64) -> Result<Vec<(usize, f64)>> {
    if d < 3 {
        return Err(Error::Config(format!("d = {d} leaves no admissible p1 in 2..d")));
    }
    if ranked.len() < d {
        return Err(Error::invalid(format!(
            "ranking covers {} predictors, need d = {d}",
            ranked.len()
        )));
    }
    let n = data.n();
    let (n_train, n_valid) = split_sizes(n, split_fraction);
    if n_valid < data.q() + 2 || n_train == 0 {
        return Err(Error::Config(format!(
            "split of {n} rows leaves {n_valid} validation rows, need at least {}",
            data.q() + 2
        )));
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed));
    let (train, valid) = rows.split_at(n_train);
    let x_train_all = data.x().select(Axis(0), train).select(Axis(1), &ranked[..d]);
    let x_valid_all = data.x().select(Axis(0), valid).select(Axis(1), &ranked[..d]);
    let y_train = data.y().select(Axis(0), train);
    let y_valid = data.y().select(Axis(0), valid);

    (2..d)
        .map(|p1| {
            let xt = with_intercept(&x_train_all.slice(s![.., ..p1]).to_owned());
            let xv = with_intercept(&x_valid_all.slice(s![.., ..p1]).to_owned());
            let b = least_squares(&xt, &y_train, tol);
            let resid = &y_valid - &xv.dot(&b);
            let mspe = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
            Ok((p1, mspe))
        })
        .collect()
}

/// The p₁ in 2..d with minimal validation MSPE; ties go to the smaller p₁.
pub fn choose_p1(data: &Dataset, report: &ScreenReport, d: usize, split_seed: u64, split_fraction: f64, tol: f64) -> Result<usize> {
    let ranked: Vec<usize> = report.scores().iter().map(|s| s.indices[0]).collect();
    let curve = mspe_curve(data, &ranked, d, split_seed, split_fraction, tol)?;
    let mut best = curve[0];
    for &(p1, e) in &curve[1..] {
        if e < best.1 {
            best = (p1, e);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Pass1,
    Pass2,
    Interaction,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Pass1 => "pass1",
            Source::Pass2 => "pass2",
            Source::Interaction => "interaction",
        }
    }
}

/// One selected feature with where it came from and its rank there.
#[derive(Debug, Clone, PartialEq)]
pub struct Selected {
    pub source: Source,
    pub indices: Vec<usize>,
    pub utility: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeSelection {
    pub p1: usize,
    pub selected: Vec<Selected>,
}

impl IterativeSelection {
    pub fn indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.indices[0]).collect()
    }
}

fn take_selected(scores: &[UtilityScore], k: usize, source: Source, map: impl Fn(usize) -> usize) -> Vec<Selected> {
    scores
        .iter()
        .take(k)
        .enumerate()
        .map(|(pos, s)| Selected {
            source,
            indices: vec![map(s.indices[0])],
            utility: s.value,
            rank: pos + 1,
        })
        .collect()
}

/// Two-pass marginal selection of d predictors: the top p₁ from the full
/// data, then the top d − p₁ after projecting the remaining predictors onto
/// the orthogonal complement of the first p₁.
pub fn iterative_screen(data: &Dataset, config: &PipelineConfig) -> Result<IterativeSelection> {
    config.validate(data.n(), data.q())?;
    let pass1 = screen_marginal(data, config.norm)?;
    let d = config.d;
    if d >= pass1.len() {
        return Ok(IterativeSelection {
            p1: pass1.len(),
            selected: take_selected(pass1.scores(), pass1.len(), Source::Pass1, |j| j),
        });
    }
    let p1 = choose_p1(
        data,
        &pass1,
        d,
        config.split_seed,
        config.split_fraction,
        config.pseudo_inverse_tolerance,
    )?;
    let first: Vec<usize> = pass1.scores()[..p1].iter().map(|s| s.indices[0]).collect();
    let mut in_first = vec![false; data.p()];
    for &j in &first {
        in_first[j] = true;
    }
    let rest: Vec<usize> = (0..data.p()).filter(|&j| !in_first[j]).collect();
    let x1 = data.x().select(Axis(1), &first);
    let x1c = data.x().select(Axis(1), &rest);
    let mut x_new = residualize(&x1, &x1c, config.pseudo_inverse_tolerance)?;
    for (mut col, orig) in x_new.columns_mut().into_iter().zip(x1c.columns()) {
        let orig_norm = orig.iter().map(|v| v * v).sum::<f64>().sqrt();
        let new_norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if new_norm <= SPAN_TOLERANCE * orig_norm {
            col.fill(0.0);
        }
    }
    let mut selected = take_selected(pass1.scores(), p1, Source::Pass1, |j| j);
    let second = data.with_predictors(x_new)?;
    match screen_marginal(&second, config.norm) {
        Ok(pass2) => selected.extend(take_selected(pass2.scores(), d - p1, Source::Pass2, |pos| rest[pos])),
        // Everything left lies in the span of the first pass.
        Err(Error::NoCandidates(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(IterativeSelection { p1, selected })
}

/// Top `interaction_budget` pairwise interactions over the full data.
pub fn select_interactions(data: &Dataset, config: &PipelineConfig) -> Result<ScreenReport> {
    config.validate(data.n(), data.q())?;
    let cache = build_moment_cache(data, DEFAULT_VAR_TOLERANCE)?;
    screen_interactions_cached(&cache, 2, config.norm, InteractionOptions::top_k(config.interaction_budget))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub marginal: IterativeSelection,
    pub interactions: ScreenReport,
}

impl PipelineOutcome {
    /// All selected features in report order: pass 1, pass 2, interactions.
    pub fn rows(&self) -> Vec<Selected> {
        let mut rows = self.marginal.selected.clone();
        rows.extend(self.interactions.scores().iter().enumerate().map(|(pos, s)| Selected {
            source: Source::Interaction,
            indices: s.indices.clone(),
            utility: s.value,
            rank: pos + 1,
        }));
        rows
    }
}

pub fn run_pipeline(data: &Dataset, config: &PipelineConfig) -> Result<PipelineOutcome> {
    Ok(PipelineOutcome {
        marginal: iterative_screen(data, config)?,
        interactions: select_interactions(data, config)?,
    })
}

/// sAICc of a candidate model computed from its deviance and null deviance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScore {
    pub k: usize,
    pub deviance: f64,
    pub null_deviance: f64,
    pub saicc: f64,
    pub saicc_scaled: f64,
}

/// Multivariate AICc small-sample penalty 2n(qk + q(q+1)/2)/(n − (k+q+1)).
pub fn aicc_penalty(n: usize, q: usize, k: usize) -> Result<f64> {
    if n <= k + q + 1 {
        return Err(Error::PenaltyUndefined { n, k, q });
    }
    let (nf, qf, kf) = (n as f64, q as f64, k as f64);
    Ok(2.0 * nf * (qf * kf + qf * (qf + 1.0) / 2.0) / (nf - (kf + qf + 1.0)))
}

/// sAICc = −(D₀ − D) + penalty, since D₀ − D = 2(ln L − ln L₀).
pub fn saicc(deviance: f64, null_deviance: f64, n: usize, q: usize, k: usize) -> Result<ModelScore> {
    if !deviance.is_finite() || !null_deviance.is_finite() {
        return Err(Error::invalid("deviances must be finite"));
    }
    let value = -(null_deviance - deviance) + aicc_penalty(n, q, k)?;
    Ok(ModelScore {
        k,
        deviance,
        null_deviance,
        saicc: value,
        saicc_scaled: value / 1000.0,
    })
}
