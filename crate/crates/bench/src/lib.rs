//! Shared fixtures for the benchmarks and the throughput report.

use gencorr::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Standard-normal predictors and responses with a fixed seed.
pub fn random_dataset(n: usize, p: usize, q: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal));
    let y = Array2::from_shape_fn((n, q), |_| rng.sample(StandardNormal));
    Dataset::new(x, y).expect("finite random data")
}
