//! Monte Carlo experiments for the limit theorems: empirical law against the
//! rescaled Ullman law, the weak law for eigenvalue `q`-norms, the integral
//! `I_{n,β,p}` and finite-n volumes, and the intersection dichotomy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{a_pq, asymptotic_volume_radius, c_pq, intersection_threshold, log_c_n_beta, EnsembleSpec, Exponent};
use crate::error::{ensure_positive, Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::rng::stream_rng;
use crate::sampler::{classical_ball_point, sample_unit_ball_eigen, ChainConfig, EigenSample};
use crate::stats::{ks_one_sample, mean_std, MonteCarloEstimate};
use crate::ullman::{ullman_abs_moment, UllmanDist};
use crate::ln_gamma;

/// Largest `n` accepted by the plain Monte Carlo estimator of `log I`.
pub const DEFAULT_LOG_I_CAP: usize = 8;

/// Atoms `values · n^{-scale_exponent}`.
pub fn empirical_measure(sample: &EigenSample, scale_exponent: f64) -> Result<EmpiricalMeasure> {
    let n = sample.values.len() as f64;
    let f = n.powf(-scale_exponent);
    EmpiricalMeasure::new(sample.values.iter().map(|v| v * f).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledUllmanFit {
    pub scale_hat: f64,
    pub ks: f64,
}

/// Fits the scale of `𝒰(p)` by matching `∫|x|^p dμ = b^p E|𝕌|^p`, then returns
/// the Kolmogorov–Smirnov distance from `μ` to the fitted law.
pub fn ks_to_scaled_ullman(mu: &EmpiricalMeasure, p: f64) -> Result<ScaledUllmanFit> {
    ensure_positive("p", p)?;
    let moment = mu.abs_moment(p);
    if moment == 0.0 {
        return Err(Error::Domain("measure is concentrated at the origin".into()));
    }
    let scale_hat = (moment / ullman_abs_moment(p, p)).powf(1.0 / p);
    let dist = UllmanDist::new(p, scale_hat)?;
    let ks = ks_one_sample(mu.atoms(), |x| dist.cdf(x).unwrap_or(f64::NAN));
    Ok(ScaledUllmanFit { scale_hat, ks })
}

/// `n^{1/p - 1/q} (Σ|λ_i|^q)^{1/q}`.
pub fn wlln_statistic(sample: &EigenSample, p: f64, q: f64) -> f64 {
    let n = sample.values.len() as f64;
    let norm_q = sample.values.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
    n.powf(1.0 / p - 1.0 / q) * norm_q
}

/// Mean and standard error of the weak-law statistic over `reps` uniform
/// samples of the ball. The metadata records the limit `C_{p,q}`, the
/// deviation from it and the sample standard deviation.
pub fn wlln_experiment(spec: &EnsembleSpec, q: f64, reps: usize, chain: &ChainConfig) -> Result<MonteCarloEstimate> {
    let p = spec.finite_p()?;
    ensure_positive("q", q)?;
    if reps < 2 {
        return Err(Error::InvalidArgument("need at least two repetitions".into()));
    }
    let set = sample_unit_ball_eigen(spec, reps, chain)?;
    let stats: Vec<f64> = set.samples.iter().map(|s| wlln_statistic(s, p, q)).collect();
    let (_, sd) = mean_std(&stats);
    let limit = c_pq(p, q)?;
    let est = MonteCarloEstimate::from_samples(&stats, chain.seed);
    let deviation = (est.value - limit).abs();
    Ok(est
        .with_meta("c_pq", limit)
        .with_meta("abs_deviation", deviation)
        .with_meta("sample_std", sd)
        .with_meta("effective_samples", set.effective_samples)
        .with_meta("base_source", set.metadata.get("base_source").cloned().unwrap_or_default()))
}

/// `log vol(𝔹_p^n) = n log(2Γ(1 + 1/p)) - log Γ(1 + n/p)`, `n log 2` for `p = ∞`.
pub fn log_volume_classical_ball(n: usize, p: Exponent) -> f64 {
    let nf = n as f64;
    match p {
        Exponent::Infinity => nf * std::f64::consts::LN_2,
        Exponent::Finite(p) => nf * (2.0f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + nf / p),
    }
}

fn log_vandermonde_or_neg_inf(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = (x[i] - x[j]).abs();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += d.ln();
        }
    }
    acc
}

const LOG_I_CHUNK: usize = 1 << 14;

/// Running log-sum-exp moments of one chunk: `(max, Σe^{w-max}, Σe^{2(w-max)}, count)`.
#[derive(Clone, Copy)]
struct LseAcc {
    max: f64,
    s1: f64,
    s2: f64,
    count: usize,
}

impl LseAcc {
    fn empty() -> Self {
        Self { max: f64::NEG_INFINITY, s1: 0.0, s2: 0.0, count: 0 }
    }

    fn from_values(w: &[f64]) -> Self {
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut s1, mut s2) = (0.0, 0.0);
        if max > f64::NEG_INFINITY {
            for &v in w {
                let e = (v - max).exp();
                s1 += e;
                s2 += e * e;
            }
        }
        Self { max, s1, s2, count: w.len() }
    }

    fn merge(self, o: Self) -> Self {
        let max = self.max.max(o.max);
        if max == f64::NEG_INFINITY {
            return Self { count: self.count + o.count, ..Self::empty() };
        }
        let (a, b) = ((self.max - max).exp(), (o.max - max).exp());
        Self { max, s1: self.s1 * a + o.s1 * b, s2: self.s2 * a * a + o.s2 * b * b, count: self.count + o.count }
    }
}

/// `log I_{n,β,p}` with the default cap on `n`.
pub fn estimate_log_i(spec: &EnsembleSpec, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    estimate_log_i_capped(spec, samples, seed, DEFAULT_LOG_I_CAP)
}

/// `log I_{n,β,p} = log ∫_{𝔹_p^n} ∏_{i<j} |λ_j - λ_i|^β dλ`, estimated as
/// `log vol(𝔹_p^n)` plus the log-mean-exp of `β log|V(λ)|` over uniform
/// points of `𝔹_p^n`. The standard error is the delta-method value
/// `sd(e^w) / (mean(e^w) sqrt(N))`.
pub fn estimate_log_i_capped(spec: &EnsembleSpec, samples: usize, seed: u64, cap: usize) -> Result<MonteCarloEstimate> {
    if spec.n > cap {
        return Err(Error::Refused(format!(
            "n = {} exceeds the cap {cap}: the variance of plain Monte Carlo for I grows like exp(c n²); use the asymptotic surrogate instead",
            spec.n
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = spec.n;
    let gamma = crate::sampler::radial_gamma(spec.p)?;
    let chunks = samples.div_ceil(LOG_I_CHUNK);
    let accs: Vec<LseAcc> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = LOG_I_CHUNK.min(samples - c * LOG_I_CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            let mut x = vec![0.0; n];
            let w: Vec<f64> = (0..len)
                .map(|_| {
                    classical_ball_point(&mut rng, spec.p, gamma.as_ref(), &mut x);
                    spec.beta * log_vandermonde_or_neg_inf(&x)
                })
                .collect();
            LseAcc::from_values(&w)
        })
        .collect();
    let acc = accs.into_iter().fold(LseAcc::empty(), LseAcc::merge);
    let nf = acc.count as f64;
    let mean = acc.s1 / nf;
    let var = ((acc.s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let value = log_volume_classical_ball(n, spec.p) + acc.max + mean.ln();
    let stderr = var.sqrt() / (mean * nf.sqrt());
    Ok(MonteCarloEstimate::new(value, stderr, acc.count, seed)
        .with_meta("estimator", "log vol(B_p^n) + log-mean-exp of beta*logV over uniform ball points")
        .with_meta("stderr_estimator", "delta method on the mean of exp(w)"))
}

/// `log vol(𝔹ⁿ_{p,β}) = log c_{n,β} + log I_{n,β,p}`. The metadata carries
/// `vol^{2/n²}` and the asymptotic surrogate for comparison.
pub fn log_volume_ball(spec: &EnsembleSpec, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let log_i = estimate_log_i(spec, samples, seed)?;
    let log_c = log_c_n_beta(spec.n, spec.beta)?;
    let value = log_c + log_i.value;
    let n2 = (spec.n * spec.n) as f64;
    let radius = (2.0 * value / n2).exp();
    let surrogate = asymptotic_volume_radius(spec)?;
    let mut est = MonteCarloEstimate::new(value, log_i.stderr, log_i.n_samples, seed)
        .with_meta("log_c_n_beta", log_c)
        .with_meta("log_i", log_i.value)
        .with_meta("radius_2_over_n2", radius)
        .with_meta("surrogate_radius", surrogate.value)
        .with_meta("surrogate_over_radius", surrogate.value / radius);
    est.metadata.insert("surrogate_label".into(), surrogate.label.into());
    Ok(est)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub t: f64,
    pub estimate: MonteCarloEstimate,
}

/// Fraction of uniform points of `𝔹ⁿ_{p,β}` whose weak-law statistic, scaled
/// by `a_{p,q}`, lies below each `t`. This is the probability that a point
/// of the volume-normalized `p`-ball lies in `t` times the volume-normalized
/// `q`-ball in the large-n regime. One sample set serves the whole grid, so
/// the fractions are monotone in `t`.
pub fn intersection_experiment(
    p: f64,
    q: f64,
    beta: f64,
    n: usize,
    t_grid: &[f64],
    reps: usize,
    chain: &ChainConfig,
) -> Result<Vec<IntersectionPoint>> {
    let threshold = intersection_threshold(p, q)?;
    if reps < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 repetitions, got {reps}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidArgument(format!("grid values must be positive, got {t}")));
    }
    let spec = EnsembleSpec::new(n, beta, Exponent::Finite(p))?;
    let scale = a_pq(Exponent::Finite(p), Exponent::Finite(q));
    let set = sample_unit_ball_eigen(&spec, reps, chain)?;
    let mut stats: Vec<f64> = set.samples.iter().map(|s| scale * wlln_statistic(s, p, q)).collect();
    stats.sort_by(f64::total_cmp);
    let total = stats.len() as f64;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let f = stats.partition_point(|&s| s <= t) as f64 / total;
            let estimate = MonteCarloEstimate::new(f, (f * (1.0 - f) / total).sqrt(), stats.len(), chain.seed)
                .with_meta("threshold", threshold)
                .with_meta("t_over_threshold", t / threshold)
                .with_meta("stderr_estimator", "binomial sqrt(f(1-f)/reps)");
            IntersectionPoint { t, estimate }
        })
        .collect())
}
