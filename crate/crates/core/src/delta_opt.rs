//! Maximization of the scale-invariant objective
//!
//! `f(t) = (2/(n(n-1))) Σ_{i<j} log|t_i - t_j| - (1/p) log((1/n) Σ |t_i|^p)`
//!
//! whose supremum is `log Δ_n(p)`.
//!
//! The ascent runs in plain coordinates kept in increasing order (steps that
//! would make two points collide are halved) and renormalizes to unit
//! `ℓ_p`-norm after every step, which leaves `f` unchanged. Barzilai–Borwein
//! gradient steps bring the iterate into the basin; a damped Newton step on
//! the analytic Hessian, with the flat radial direction penalized, finishes
//! the job once the gradient is small. For `p <= 1` a coordinate that reaches
//! zero is pinned there: for `p < 1` the objective has a cusp maximum in that
//! coordinate, for `p = 1` the subgradient condition decides.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::rng::stream_rng;
use crate::vandermonde::gauss_lobatto_nodes;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Stop once the sup-norm of the gradient at unit `ℓ_p`-norm is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra random starts for `p < 1`.
    pub restarts: usize,
    pub seed: u64,
    /// Keep every accepted iterate in the result.
    pub record_trace: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000, restarts: 5, seed: 0, record_trace: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub p: f64,
    /// Increasing maximizer with unit `ℓ_p`-norm.
    pub points: Vec<f64>,
    pub log_delta_n: f64,
    pub delta_n: f64,
    pub lagrange_lambda_hat: f64,
    pub max_lagrange_residual: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the first nonnegative point.
    pub k0: usize,
    /// Smallest gap between consecutive points of equal sign.
    pub min_same_sign_gap: f64,
    /// `max_i |t_i + t_{n-1-i}|`; zero when the optimum is its own mirror image.
    pub mirror_defect: f64,
    pub starts: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<Vec<f64>>,
}

/// `Σ_k α_k t_k` and the per-point residuals of the first-order conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangeReport {
    pub lambda_hat: f64,
    /// `α_k - (n(n-1)/2) |t_k|^{p-1} sgn(t_k) / S` with `S = Σ|t_i|^p`
    /// (`S = 1` on the unit sphere). At a zero entry the condition becomes an
    /// inclusion: for `p = 1` the residual is the excess of `|α_k|` over
    /// `λ/S`, for `p < 1` it is vacuous and reported as `None`.
    pub residuals: Vec<Option<f64>>,
}

impl LagrangeReport {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0, |m, r| m.max(r.abs()))
    }
}

const COLLISION_GAP: f64 = 1e-14;
const NEWTON_SWITCH: f64 = f64::INFINITY;
const NONMONOTONE_WINDOW: usize = 10;

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn pairs(n: usize) -> f64 {
    (n * (n - 1)) as f64 / 2.0
}

/// The objective `f(t)`. Coincident points give `-∞`.
pub fn delta_objective(p: f64, t: &[f64]) -> Result<f64> {
    ensure_positive("p", p)?;
    let n = t.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    let s: f64 = t.iter().map(|x| x.abs().powf(p)).sum();
    if s == 0.0 {
        return Err(Error::Domain("all points are zero".into()));
    }
    Ok(objective_unchecked(p, t, s))
}

fn objective_unchecked(p: f64, t: &[f64], s: f64) -> f64 {
    let n = t.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (t[j] - t[i]).abs();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += d.ln();
        }
    }
    acc / pairs(n) - (s / n as f64).ln() / p
}

fn alphas(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut a = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            if i != k {
                a[k] += 1.0 / (t[k] - t[i]);
            }
        }
    }
    a
}

/// `Σ_k α_k t_k` with `α_k = Σ_{i≠k} 1/(t_k - t_i)`, and the residuals of
/// `α_k = λ |t_k|^{p-1} sgn(t_k)` at `λ = n(n-1)/2`. Requires strictly
/// increasing points.
pub fn lagrange_residual(p: f64, t: &[f64]) -> Result<LagrangeReport> {
    ensure_positive("p", p)?;
    if t.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    if t.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidArgument("points must be strictly increasing".into()));
    }
    let n = t.len();
    let a = alphas(t);
    let lambda_hat = a.iter().zip(t).map(|(a, t)| a * t).sum();
    let s: f64 = t.iter().map(|x| x.abs().powf(p)).sum();
    let lam = pairs(n);
    let residuals = t
        .iter()
        .zip(&a)
        .map(|(&tk, &ak)| {
            if tk == 0.0 && p < 1.0 {
                None
            } else if tk == 0.0 && p == 1.0 {
                // subgradient condition |α_k| <= λ / S
                Some(sign(ak) * (ak.abs() - lam / s).max(0.0))
            } else {
                Some(ak - lam * field_slope(p, tk) / s)
            }
        })
        .collect();
    Ok(LagrangeReport { lambda_hat, residuals })
}

/// `|x|^{p-1} sgn(x)`, zero at the origin.
fn field_slope(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p - 1.0) * sign(x)
    }
}

struct Problem {
    p: f64,
    n: usize,
    c: f64,
}

impl Problem {
    fn norm_p(&self, t: &[f64]) -> f64 {
        t.iter().map(|x| x.abs().powf(self.p)).sum::<f64>().powf(1.0 / self.p)
    }

    fn normalize(&self, t: &mut [f64]) {
        let r = self.norm_p(t);
        t.iter_mut().for_each(|x| *x /= r);
    }

    fn value(&self, t: &[f64]) -> f64 {
        let s: f64 = t.iter().map(|x| x.abs().powf(self.p)).sum();
        objective_unchecked(self.p, t, s)
    }

    /// Gradient, with pinned zero coordinates handled by the subgradient rule.
    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        let s: f64 = t.iter().map(|x| x.abs().powf(self.p)).sum();
        let a = alphas(t);
        (0..self.n)
            .map(|k| {
                let repulsion = self.c * a[k];
                if t[k] == 0.0 && self.p <= 1.0 {
                    if self.p < 1.0 {
                        return 0.0;
                    }
                    // p = 1: soft threshold of the subdifferential [-1/S, 1/S]
                    let excess = repulsion.abs() - 1.0 / s;
                    return if excess > 0.0 { excess * sign(repulsion) } else { 0.0 };
                }
                repulsion - field_slope(self.p, t[k]) / s
            })
            .collect()
    }

    /// Hessian minus `t tᵀ/|t|²`, restricted to the free coordinates.
    fn penalized_hessian(&self, t: &[f64], free: &[usize]) -> DMatrix<f64> {
        let p = self.p;
        let s: f64 = t.iter().map(|x| x.abs().powf(p)).sum();
        let m = free.len();
        let tt: f64 = free.iter().map(|&k| t[k] * t[k]).sum();
        let mut h = DMatrix::zeros(m, m);
        for (a, &k) in free.iter().enumerate() {
            let mut diag = 0.0;
            for i in 0..self.n {
                if i != k {
                    diag -= 1.0 / (t[k] - t[i]).powi(2);
                }
            }
            h[(a, a)] = self.c * diag - (p - 1.0) * t[k].abs().powf(p - 2.0) / s;
            for (b, &j) in free.iter().enumerate() {
                if j != k {
                    h[(a, b)] = self.c / (t[k] - t[j]).powi(2);
                }
                h[(a, b)] += p * field_slope(p, t[k]) * field_slope(p, t[j]) / (s * s);
                h[(a, b)] -= t[k] * t[j] / tt;
            }
        }
        h
    }

    /// Ordered, collision-free, and (for `p <= 1`) with sign crossings
    /// snapped to zero.
    fn admissible(&self, t: &[f64], trial: &mut [f64]) -> bool {
        if self.p <= 1.0 {
            let scale = trial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (new, &old) in trial.iter_mut().zip(t) {
                if old == 0.0 || new.abs() < 1e-12 * scale || sign(*new) != sign(old) {
                    *new = 0.0;
                }
            }
        }
        let scale = trial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        scale > 0.0 && trial.windows(2).all(|w| w[1] - w[0] > COLLISION_GAP * scale)
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Run {
    points: Vec<f64>,
    value: f64,
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<Vec<f64>>,
}

fn ascend(prob: &Problem, init: Vec<f64>, cfg: &OptimizerConfig) -> Run {
    let mut t = init;
    prob.normalize(&mut t);
    let mut f = prob.value(&t);
    let mut g = prob.gradient(&t);
    let mut history = vec![f];
    let mut step = 1e-3;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(t.clone());
    }
    let mut iterations = 0;
    let mut stalled = 0;
    while iterations < cfg.max_iter {
        let gnorm = sup_norm(&g);
        if gnorm <= cfg.tol {
            return Run { points: t, value: f, gradient_norm: gnorm, iterations, converged: true, trace };
        }
        iterations += 1;
        let mut accepted = None;
        if gnorm < NEWTON_SWITCH {
            accepted = newton_step(prob, &t, f, &g);
        }
        if accepted.is_none() {
            if let Some((t_old, g_old)) = &prev {
                let s: Vec<f64> = t.iter().zip(t_old).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(g_old).map(|(a, b)| a - b).collect();
                let ss: f64 = s.iter().map(|x| x * x).sum();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().abs();
                if sy > 0.0 {
                    step = (ss / sy).clamp(1e-12, 1e3);
                }
            }
            let reference = history.iter().rev().take(NONMONOTONE_WINDOW).fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let gg: f64 = g.iter().map(|x| x * x).sum();
            let mut alpha = step;
            for _ in 0..60 {
                let mut trial: Vec<f64> = t.iter().zip(&g).map(|(x, d)| x + alpha * d).collect();
                if prob.admissible(&t, &mut trial) {
                    prob.normalize(&mut trial);
                    let ft = prob.value(&trial);
                    if ft >= reference + 1e-4 * alpha * gg || (ft > f && alpha < 1e-8) {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            step = alpha;
        }
        match accepted {
            Some((trial, ft)) => {
                prev = Some((t.clone(), g.clone()));
                t = trial;
                f = ft;
                g = prob.gradient(&t);
                history.push(f);
                stalled = 0;
                if cfg.record_trace {
                    trace.push(t.clone());
                }
            }
            None => {
                // no admissible ascent step: restart the step length
                stalled += 1;
                prev = None;
                step = 1e-3;
                if stalled > 3 {
                    break;
                }
            }
        }
    }
    let gnorm = sup_norm(&g);
    Run { points: t, value: f, gradient_norm: gnorm, iterations, converged: gnorm <= cfg.tol, trace }
}

/// Damped Newton step over the non-pinned coordinates. Accepted when the
/// gradient shrinks without losing objective beyond rounding.
fn newton_step(prob: &Problem, t: &[f64], f: f64, g: &[f64]) -> Option<(Vec<f64>, f64)> {
    let free: Vec<usize> = (0..prob.n).filter(|&k| !(t[k] == 0.0 && prob.p <= 1.0)).collect();
    if free.len() < 2 {
        return None;
    }
    let h = -prob.penalized_hessian(t, &free);
    let rhs = DVector::from_iterator(free.len(), free.iter().map(|&k| g[k]));
    let gnorm = sup_norm(g);
    let scale = h.diagonal().amax().max(1e-300);
    // Levenberg damping covers flat directions (for p = 1 a translation that
    // keeps the sign pattern leaves the objective unchanged)
    let mut mu = 0.0;
    for _ in 0..8 {
        let damped = &h + DMatrix::identity(free.len(), free.len()) * mu;
        if let Some(chol) = damped.cholesky() {
            let d = chol.solve(&rhs);
            if let Some(found) = damped_line_search(prob, t, f, gnorm, &free, &d) {
                return Some(found);
            }
        }
        mu = if mu == 0.0 { 1e-10 * scale } else { mu * 100.0 };
    }
    None
}

fn damped_line_search(prob: &Problem, t: &[f64], f: f64, gnorm: f64, free: &[usize], d: &DVector<f64>) -> Option<(Vec<f64>, f64)> {
    let mut alpha = 1.0;
    for _ in 0..30 {
        let mut trial = t.to_vec();
        for (a, &k) in free.iter().enumerate() {
            trial[k] += alpha * d[a];
        }
        if prob.admissible(t, &mut trial) {
            prob.normalize(&mut trial);
            let ft = prob.value(&trial);
            let gt = sup_norm(&prob.gradient(&trial));
            if ft > f || (ft >= f - 1e-13 * f.abs().max(1.0) && gt < gnorm) {
                return Some((trial, ft));
            }
        }
        alpha *= 0.5;
    }
    None
}

fn random_start(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    loop {
        let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > 1e-6) && t[0] < 0.0 && t[n - 1] > 0.0 {
            return t;
        }
    }
}

/// `Δ_n(p)` by numerical maximization from Gauss–Lobatto nodes scaled to unit
/// `ℓ_p`-norm (plus seeded random starts when `p < 1`). `n = 2` uses the
/// analytic optimum. A run that exhausts `max_iter` is reported with
/// `converged = false`.
pub fn optimize_delta_n(p: f64, n: usize, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    ensure_positive("p", p)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    ensure_positive("tol", cfg.tol)?;
    let prob = Problem { p, n, c: 1.0 / pairs(n) };
    if n == 2 {
        // for p >= 1 the symmetric pair wins; for p < 1, |t_1|^p + |t_2|^p is
        // concave at fixed gap and the optimum moves to the boundary {0, 1}
        let points = if p >= 1.0 {
            let r = 2f64.powf(-1.0 / p);
            vec![-r, r]
        } else {
            vec![0.0, 1.0]
        };
        let run = Run {
            value: prob.value(&points),
            gradient_norm: sup_norm(&prob.gradient(&points)),
            trace: if cfg.record_trace { vec![points.clone()] } else { vec![] },
            points,
            iterations: 0,
            converged: true,
        };
        return finish(&prob, run, 1);
    }
    let mut starts = vec![gauss_lobatto_nodes(n)?.points];
    if p < 1.0 {
        starts.extend((0..cfg.restarts).map(|r| random_start(n, cfg.seed, r as u64)));
    }
    let count = starts.len();
    let runs: Vec<Run> = starts.into_par_iter().map(|s| ascend(&prob, s, cfg)).collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| {
            // prefer converged runs, then the larger objective; earlier start wins ties
            match (a.converged, b.converged) {
                (true, false) => a,
                (false, true) => b,
                _ => {
                    if b.value > a.value + 1e-12 {
                        b
                    } else {
                        a
                    }
                }
            }
        })
        .expect("at least one start");
    finish(&prob, best, count)
}

fn finish(prob: &Problem, run: Run, starts: usize) -> Result<OptimizerResult> {
    let n = prob.n;
    let lagrange = lagrange_residual(prob.p, &run.points)?;
    let t = &run.points;
    let k0 = t.iter().position(|&x| x >= 0.0).unwrap_or(n);
    let min_same_sign_gap = t
        .windows(2)
        .filter(|w| sign(w[0]) == sign(w[1]) && w[0] != 0.0)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mirror_defect = (0..n).map(|i| (t[i] + t[n - 1 - i]).abs()).fold(0.0, f64::max);
    Ok(OptimizerResult {
        p: prob.p,
        log_delta_n: run.value,
        delta_n: run.value.exp(),
        lagrange_lambda_hat: lagrange.lambda_hat,
        max_lagrange_residual: lagrange.max_abs_residual(),
        gradient_norm: run.gradient_norm,
        iterations: run.iterations,
        converged: run.converged,
        k0,
        min_same_sign_gap,
        mirror_defect,
        starts,
        trace: run.trace,
        points: run.points,
    })
}
