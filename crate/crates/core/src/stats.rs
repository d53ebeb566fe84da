//! Small statistical toolkit: Monte Carlo estimates, Kolmogorov–Smirnov
//! distances, autocorrelation diagnostics and low-discrepancy points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A stochastic estimate together with the information needed to reproduce it.
///
/// `stderr` is the sample standard deviation divided by `sqrt(n_samples)`
/// unless the producing routine documents another estimator in `metadata`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub metadata: BTreeMap<String, String>,
}

impl MonteCarloEstimate {
    pub fn new(value: f64, stderr: f64, n_samples: usize, seed: u64) -> Self {
        Self { value, stderr, n_samples, seed, metadata: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Mean and standard error of `values`.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let (mean, sd) = mean_std(values);
        let n = values.len();
        Self::new(mean, sd / (n as f64).sqrt(), n, seed)
    }

    /// `|value - reference| <= k * stderr`.
    pub fn within_sigma(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.stderr
    }
}

/// Sample mean and (n-1)-normalized standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// One-sample Kolmogorov–Smirnov distance between `sorted` and `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance. Both inputs must be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Integrated autocorrelation time with Geyer's initial positive sequence
/// truncation. Returns 1 for fewer than 4 values or zero variance.
pub fn integrated_autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let (mean, _) = mean_std(series);
    let c0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let rho = |lag: usize| -> f64 {
        (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n / 2 {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    tau.max(1.0)
}

/// Lag-1 autocorrelation.
pub fn lag1_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 3 {
        return 0.0;
    }
    let (mean, _) = mean_std(series);
    let c0: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if c0 <= 0.0 {
        return 0.0;
    }
    let c1: f64 = series.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    c1 / c0
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Linear grid `lo, ..., hi` with `count` points (inclusive).
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}
