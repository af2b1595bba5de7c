use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Poisson, StandardNormal};

use super::config::{CoefScheme, CovariateDist, Link, Noise, SimConfig, Truth};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Exp-link draws are regenerated on overflow at most this many times.
const MAX_ATTEMPTS: u64 = 1000;

/// One simulated replicate.
#[derive(Debug, Clone)]
pub struct SimDraw {
    pub data: Dataset,
    /// 0-based tuples the screen should recover.
    pub truth: Vec<Vec<usize>>,
    pub coefficients: Array2<f64>,
    /// Substreams discarded because the response overflowed.
    pub regenerations: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent ChaCha8 stream for (base seed, replicate, attempt).
pub fn substream(base_seed: u64, rep: u64, attempt: u64) -> ChaCha8Rng {
    let mut state = splitmix64(base_seed);
    state = splitmix64(state ^ rep);
    state = splitmix64(state ^ attempt.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Lower Cholesky factor of Σ_{ℓm} = rho^{|ℓ−m|}.
pub fn ar1_cholesky(dim: usize, rho: f64) -> Array2<f64> {
    let sigma = Array2::from_shape_fn((dim, dim), |(l, m)| rho.powi((l as i32 - m as i32).abs()));
    let mut l = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..=i {
            let mut s = sigma[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = if i == j { s.sqrt() } else { s / l[[j, j]] };
        }
    }
    l
}

fn draw_coefficients(config: &SimConfig, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (rows, q) = (config.truth.term_count(), config.q);
    let mut b = match &config.coef_scheme {
        CoefScheme::Fixed(b) => b.clone(),
        CoefScheme::Mvn { mean, rho } => {
            let chol = ar1_cholesky(q, *rho);
            let mut b = Array2::zeros((rows, q));
            for k in 0..rows {
                let z: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
                for m in 0..q {
                    let mut v = *mean;
                    for t in 0..=m {
                        v += chol[[m, t]] * z[t];
                    }
                    b[[k, m]] = v;
                }
            }
            b
        }
        CoefScheme::FanLv { p_negative } => {
            let a = 4.0 * (config.n as f64).ln() / (config.n as f64).sqrt();
            let flip = Bernoulli::new(*p_negative).expect("validated probability");
            let mut b = Array2::zeros((rows, q));
            for k in 0..rows {
                for m in 0..q {
                    let negative = flip.sample(rng);
                    let z: f64 = rng.sample(StandardNormal);
                    let mag = a + z.abs();
                    b[[k, m]] = if negative { -mag } else { mag };
                }
            }
            b
        }
    };
    if let Truth::Mixed { marginals, pair_scale, .. } = &config.truth {
        for k in marginals.len()..rows {
            b.row_mut(k).mapv_inplace(|v| v * pair_scale);
        }
    }
    b
}

fn draw_predictors(config: &SimConfig, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, p) = (config.n, config.p);
    let mut x = Array2::zeros((n, p));
    match config.covariate_dist {
        CovariateDist::Normal { mean, sd } => {
            let d = Normal::new(mean, sd).expect("validated normal");
            for j in 0..p {
                for i in 0..n {
                    x[[i, j]] = d.sample(rng);
                }
            }
        }
        CovariateDist::Poisson { lambda } => {
            let d = Poisson::new(lambda).expect("validated poisson");
            for j in 0..p {
                for i in 0..n {
                    x[[i, j]] = d.sample(rng);
                }
            }
        }
    }
    x
}

/// n × terms design matrix of the causal terms.
fn design(truth: &Truth, x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let marginal = |j: usize| x.column(j).to_vec();
    let pair = |[a, b]: [usize; 2]| (0..n).map(|i| x[[i, a]] * x[[i, b]]).collect::<Vec<_>>();
    match truth {
        Truth::Marginal(ix) => cols.extend(ix.iter().map(|&j| marginal(j))),
        Truth::Pairs(ps) => cols.extend(ps.iter().map(|&p| pair(p))),
        Truth::Mixed { marginals, pairs, .. } => {
            cols.extend(marginals.iter().map(|&j| marginal(j)));
            cols.extend(pairs.iter().map(|&p| pair(p)));
        }
    }
    Array2::from_shape_fn((n, cols.len()), |(i, t)| cols[t][i])
}

/// Generate replicate `rep_index` of `config`. Deterministic in
/// (base_seed, rep_index).
pub fn gen_sim(config: &SimConfig, rep_index: usize) -> Result<SimDraw> {
    config.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = substream(config.base_seed, rep_index as u64, attempt);
        let b = draw_coefficients(config, &mut rng);
        let x = draw_predictors(config, &mut rng);
        let mut y = design(&config.truth, &x).dot(&b);
        if config.noise == Noise::StandardNormal {
            for v in y.iter_mut() {
                *v += rng.sample::<f64, _>(StandardNormal);
            }
        }
        if config.link == Link::Exp {
            y.mapv_inplace(f64::exp);
        }
        if y.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let data = Dataset::new(x, y)?;
        return Ok(SimDraw {
            data,
            truth: config.truth.screened_tuples(),
            coefficients: b,
            regenerations: attempt,
        });
    }
    Err(Error::Config(format!(
        "replicate {rep_index} overflowed in {MAX_ATTEMPTS} consecutive draws"
    )))
}
