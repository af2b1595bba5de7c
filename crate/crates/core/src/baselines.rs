//! Comparison screeners for multivariate responses: SIRS and DC-SIS.

use ndarray::ArrayView1;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::moments::{build_moment_cache, MomentCache, DEFAULT_VAR_TOLERANCE};
use crate::report::{Method, ScreenMeta, ScreenReport, UtilityScore};

fn require_rows(data: &Dataset, what: &str) -> Result<()> {
    if data.n() < 4 {
        return Err(Error::invalid(format!(
            "{what} needs at least 4 observations, got {}",
            data.n()
        )));
    }
    Ok(())
}

fn report(cache: &MomentCache, scores: Vec<UtilityScore>, method: Method) -> ScreenReport {
    let candidates = scores.len() as u128;
    ScreenReport::new(
        scores,
        method,
        1,
        ScreenMeta {
            n: cache.n(),
            p: cache.p(),
            q: cache.q(),
            candidates,
            degenerate: cache.degenerate_columns().to_vec(),
        },
    )
}

/// Double-centered n×n distance matrix, row-major.
fn double_center(mut d: Vec<f64>, n: usize) -> Vec<f64> {
    let mut row_means = vec![0.0; n];
    for (k, rm) in row_means.iter_mut().enumerate() {
        *rm = d[k * n..(k + 1) * n].iter().sum::<f64>() / n as f64;
    }
    // Distance matrices are symmetric, so column means equal row means.
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for k in 0..n {
        for l in 0..n {
            d[k * n + l] += grand - row_means[k] - row_means[l];
        }
    }
    d
}

fn scalar_distances(x: ArrayView1<'_, f64>) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            d[k * n + l] = (x[k] - x[l]).abs();
        }
    }
    d
}

fn response_distances(data: &Dataset) -> Vec<f64> {
    let (n, q) = (data.n(), data.q());
    let y = data.y();
    let mut d = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            let mut s = 0.0;
            for m in 0..q {
                let t = y[[k, m]] - y[[l, m]];
                s += t * t;
            }
            d[k * n + l] = s.sqrt();
        }
    }
    d
}

/// DC-SIS: squared sample distance correlation (V-statistic) between each
/// predictor and the whole response vector.
pub fn dcsis_screen(data: &Dataset) -> Result<ScreenReport> {
    require_rows(data, "DC-SIS")?;
    let cache = build_moment_cache(data, DEFAULT_VAR_TOLERANCE)?;
    let n = data.n();
    let b = double_center(response_distances(data), n);
    let nn = (n * n) as f64;
    let dvar_y = b.iter().map(|v| v * v).sum::<f64>() / nn;
    if !(dvar_y > 0.0) {
        return Err(Error::DegenerateResponse { component: 0 });
    }
    let active = cache.active_columns();
    let scores = active
        .par_iter()
        .map(|&j| {
            let a = double_center(scalar_distances(data.x_col(j)), n);
            let mut cross = 0.0;
            let mut own = 0.0;
            for (u, v) in a.iter().zip(&b) {
                cross += u * v;
                own += u * u;
            }
            let (dcov, dvar_x) = (cross / nn, own / nn);
            let value = if dvar_x > 0.0 {
                (dcov / (dvar_x * dvar_y).sqrt()).max(0.0)
            } else {
                0.0
            };
            UtilityScore::new(vec![j], value)
        })
        .collect();
    Ok(report(&cache, scores, Method::DcSis))
}

/// Componentwise strict order on response vectors: `a ≺ b` iff every
/// component of `a` is below the matching component of `b`.
pub fn response_precedes(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> bool {
    a.iter().zip(b.iter()).all(|(u, v)| u < v)
}

/// SIRS: ω̂_j = (1/n) Σ_k [(1/n) Σ_i z_ij 1{Y_i ≺ Y_k}]² with z_j the
/// standardized predictor (sample sd, divisor n−1).
pub fn sirs_screen(data: &Dataset) -> Result<ScreenReport> {
    require_rows(data, "SIRS")?;
    let cache = build_moment_cache(data, DEFAULT_VAR_TOLERANCE)?;
    let n = data.n();
    let y = data.y();
    // below[k] lists the rows i with Y_i ≺ Y_k.
    let below: Vec<Vec<usize>> = (0..n)
        .map(|k| {
            (0..n)
                .filter(|&i| response_precedes(y.row(i), y.row(k)))
                .collect()
        })
        .collect();
    let nf = n as f64;
    let active = cache.active_columns();
    let scores = active
        .par_iter()
        .map(|&j| {
            let sd = cache.x_vars()[j].sqrt();
            let z: Vec<f64> = cache.centered_column(j).iter().map(|v| v / sd).collect();
            let mut total = 0.0;
            for rows in &below {
                let s: f64 = rows.iter().map(|&i| z[i]).sum::<f64>() / nf;
                total += s * s;
            }
            UtilityScore::new(vec![j], total / nf)
        })
        .collect();
    Ok(report(&cache, scores, Method::Sirs))
}
