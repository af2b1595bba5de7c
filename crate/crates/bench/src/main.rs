//! Measures pair-scan throughput on a sample and extrapolates to a full
//! mouse-scale scan (n = 288, q = 7, p = 44,428).

use std::time::Instant;

use gencorr::moments::{build_moment_cache, DEFAULT_VAR_TOLERANCE};
use gencorr::screen::{screen_interactions_cached, screen_marginal_cached, InteractionOptions};
use gencorr::topk::binomial;
use gencorr::NormSpec;
use gencorr_bench::random_dataset;

const N: usize = 288;
const Q: usize = 7;
const FULL_P: usize = 44_428;
const SAMPLE_P: usize = 3_000;

fn main() {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());

    let data = random_dataset(N, FULL_P, Q, 1);
    let t = Instant::now();
    let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE).expect("cache");
    let report = screen_marginal_cached(&cache, NormSpec::FROBENIUS).expect("marginal screen");
    println!(
        "marginal: n={N} p={FULL_P} q={Q}: {:.3}s for {} predictors",
        t.elapsed().as_secs_f64(),
        report.len()
    );

    let sample = random_dataset(N, SAMPLE_P, Q, 2);
    let cache = build_moment_cache(&sample, DEFAULT_VAR_TOLERANCE).expect("cache");
    let t = Instant::now();
    screen_interactions_cached(&cache, 2, NormSpec::FROBENIUS, InteractionOptions::top_k(1_000)).expect("pair scan");
    let secs = t.elapsed().as_secs_f64();
    let sampled = binomial(SAMPLE_P, 2) as f64;
    let rate = sampled / secs;
    let full = binomial(FULL_P, 2) as f64;
    println!("pairs: n={N} p={SAMPLE_P} q={Q}: {sampled:.0} pairs in {secs:.2}s ({rate:.3e} pairs/s, {threads} threads)");
    println!(
        "extrapolated full scan at p={FULL_P}: {full:.3e} pairs, about {:.1} min",
        full / rate / 60.0
    );
}
