#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Kolmogorov distribution quantile at the 1% level.
const KS_1PCT: f64 = 1.628;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// One-sample KS statistic against `cdf`.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_passes(xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> bool {
    let n = xs.len() as f64;
    ks_statistic(xs, cdf) < KS_1PCT / n.sqrt()
}

/// Two-sample KS test at the 1% level.
pub fn ks2_passes(mut a: Vec<f64>, mut b: Vec<f64>) -> bool {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (n, m) = (n as f64, m as f64);
    d < KS_1PCT * ((n + m) / (n * m)).sqrt()
}

/// `|a − b| ≤ k·se`.
pub fn within_se(a: f64, b: f64, se: f64, k: f64) -> bool {
    (a - b).abs() <= k * se
}
