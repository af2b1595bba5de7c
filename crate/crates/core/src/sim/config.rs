use ndarray::{array, Array2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateDist {
    Normal { mean: f64, sd: f64 },
    Poisson { lambda: f64 },
}

/// How the coefficient matrix B is obtained for each replicate.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefScheme {
    /// Each row of B drawn from MVN(mean·1, Σ) with Σ_{ℓm} = rho^{|ℓ−m|}.
    Mvn { mean: f64, rho: f64 },
    /// The same B for every replicate.
    Fixed(Array2<f64>),
    /// β = (−1)^U (a + |Z|), a = 4 ln(n)/√n, U ~ Bernoulli(p_negative),
    /// Z ~ N(0, 1), drawn independently per entry.
    FanLv { p_negative: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Identity,
    Exp,
}

/// Causal structure. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    /// Y depends linearly on these predictors.
    Marginal(Vec<usize>),
    /// Y depends on these pairwise products.
    Pairs(Vec<[usize; 2]>),
    /// Marginal terms followed by pair terms; pair coefficient rows are
    /// multiplied by `pair_scale`.
    Mixed {
        marginals: Vec<usize>,
        pairs: Vec<[usize; 2]>,
        pair_scale: f64,
    },
}

impl Truth {
    /// Tuples a screen is expected to recover.
    pub fn screened_tuples(&self) -> Vec<Vec<usize>> {
        match self {
            Truth::Marginal(ix) => ix.iter().map(|&j| vec![j]).collect(),
            Truth::Pairs(pairs) | Truth::Mixed { pairs, .. } => {
                pairs.iter().map(|p| p.to_vec()).collect()
            }
        }
    }

    /// Interaction order of the screened tuples.
    pub fn order(&self) -> usize {
        match self {
            Truth::Marginal(_) => 1,
            _ => 2,
        }
    }

    /// Number of rows of B.
    pub fn term_count(&self) -> usize {
        match self {
            Truth::Marginal(ix) => ix.len(),
            Truth::Pairs(p) => p.len(),
            Truth::Mixed { marginals, pairs, .. } => marginals.len() + pairs.len(),
        }
    }

    fn max_index(&self) -> usize {
        let m = match self {
            Truth::Marginal(ix) => ix.iter().copied().max(),
            Truth::Pairs(p) => p.iter().flatten().copied().max(),
            Truth::Mixed { marginals, pairs, .. } => marginals
                .iter()
                .copied()
                .chain(pairs.iter().flatten().copied())
                .max(),
        };
        m.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    None,
    /// Independent N(0, 1) added to every response entry.
    StandardNormal,
}

/// Declarative description of one simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub id: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub covariate_dist: CovariateDist,
    pub coef_scheme: CoefScheme,
    pub link: Link,
    pub truth: Truth,
    pub noise: Noise,
    pub reps: usize,
    pub base_seed: u64,
}

/// Identifiers accepted by [`SimConfig::named`].
pub const NAMED_SIMULATIONS: [&str; 11] =
    ["1A", "1B", "1C", "2A", "3A", "3B", "3C", "4A", "5A", "5B", "5C"];

impl SimConfig {
    /// The published design for a named simulation (400 replicates, seed 0).
    pub fn named(id: &str) -> Result<Self> {
        let id = id.trim().to_ascii_uppercase();
        let normal = |mean, sd| CovariateDist::Normal { mean, sd };
        let poisson = CovariateDist::Poisson { lambda: 2.0 };
        let mvn = |mean| CoefScheme::Mvn { mean, rho: 0.5 };
        let fan_lv = CoefScheme::FanLv { p_negative: 0.4 };
        let first3 = Truth::Marginal(vec![0, 1, 2]);
        let pairs = vec![[0, 1], [2, 3]];

        let (n, p, q, dist, coef, link, truth, noise) = match id.as_str() {
            "1A" => (60, 3000, 6, normal(0.0, 5.0), mvn(0.0), Link::Identity, first3, Noise::None),
            "1B" => (60, 3000, 6, normal(3.0, 1.0), mvn(3.0), Link::Identity, first3, Noise::None),
            "1C" => (120, 1500, 4, normal(0.0, 5.0), fan_lv, Link::Identity, first3, Noise::None),
            "2A" => (60, 3000, 6, normal(0.0, 5.0), mvn(0.0), Link::Exp, first3, Noise::None),
            "3A" => (60, 3000, 6, poisson, mvn(0.0), Link::Identity, first3, Noise::None),
            "3B" => (60, 3000, 6, poisson, mvn(3.0), Link::Identity, first3, Noise::None),
            "3C" => (120, 1500, 4, poisson, fan_lv, Link::Identity, first3, Noise::None),
            "4A" => (60, 3000, 6, poisson, mvn(0.0), Link::Exp, first3, Noise::None),
            "5A" => (
                100,
                1000,
                4,
                normal(0.0, 2.0),
                CoefScheme::Fixed(array![[1.0, -1.0, -2.5, 2.0], [2.0, 1.5, -2.0, 1.0]]),
                Link::Identity,
                Truth::Pairs(pairs),
                Noise::StandardNormal,
            ),
            "5B" => (100, 1000, 4, normal(0.0, 2.0), mvn(3.0), Link::Identity, Truth::Pairs(pairs), Noise::None),
            "5C" => (
                100,
                1000,
                4,
                normal(0.0, 2.0),
                mvn(3.0),
                Link::Identity,
                Truth::Mixed {
                    marginals: vec![0, 1, 2, 3],
                    pairs,
                    pair_scale: 3.0,
                },
                Noise::None,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown simulation '{other}' (expected one of {})",
                    NAMED_SIMULATIONS.join(", ")
                )))
            }
        };
        Ok(SimConfig {
            id,
            n,
            p,
            q,
            covariate_dist: dist,
            coef_scheme: coef,
            link,
            truth,
            noise,
            reps: 400,
            base_seed: 0,
        })
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n < 4 || self.p == 0 || self.q == 0 {
            return fail(format!("need n >= 4, p >= 1, q >= 1 (got {}, {}, {})", self.n, self.p, self.q));
        }
        if self.truth.max_index() >= self.p {
            return fail("truth refers to predictors beyond p".into());
        }
        if self.truth.term_count() == 0 {
            return fail("truth has no terms".into());
        }
        match self.covariate_dist {
            CovariateDist::Normal { mean, sd } => {
                if !mean.is_finite() || !(sd > 0.0) || !sd.is_finite() {
                    return fail(format!("normal covariates need finite mean and sd > 0 (sd = {sd})"));
                }
            }
            CovariateDist::Poisson { lambda } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return fail(format!("poisson covariates need lambda > 0 (got {lambda})"));
                }
            }
        }
        match &self.coef_scheme {
            CoefScheme::Mvn { mean, rho } => {
                if !mean.is_finite() || !(rho.abs() < 1.0) {
                    return fail(format!("MVN coefficients need |rho| < 1 (got {rho})"));
                }
            }
            CoefScheme::Fixed(b) => {
                if b.dim() != (self.truth.term_count(), self.q) {
                    return fail(format!(
                        "fixed B is {:?}, expected {:?}",
                        b.dim(),
                        (self.truth.term_count(), self.q)
                    ));
                }
            }
            CoefScheme::FanLv { p_negative } => {
                if !(0.0..=1.0).contains(p_negative) {
                    return fail(format!("bernoulli probability {p_negative} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}
