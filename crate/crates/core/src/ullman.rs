//! The Ullman distribution `𝒰(p)`: the equilibrium measure of `[-1, 1]` in the
//! external field `|x|^p / λ_p`, together with its logarithmic-potential
//! identities.
//!
//! The standard density is
//! `h_p(x) = (p/π) ∫_{|x|}^1 t^{p-1} / sqrt(t² - x²) dt`, and `UllmanDist`
//! carries an additional scale `b` so that its density is `h_p(x/b)/b`.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::quadrature::{integrate, integrate_with_breaks, QuadConfig};
use crate::rng::stream_rng;
use crate::stats::{mean_std, radical_inverse, MonteCarloEstimate};
use crate::ln_gamma;

/// Ullman law with shape `p` on the interval `[-b, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UllmanDist {
    p: f64,
    b: f64,
}

impl UllmanDist {
    pub fn new(p: f64, b: f64) -> Result<Self> {
        ensure_positive("p", p)?;
        ensure_positive("b", b)?;
        Ok(Self { p, b })
    }

    /// Unit scale, support `[-1, 1]`.
    pub fn standard(p: f64) -> Result<Self> {
        Self::new(p, 1.0)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Density at `x`. Infinite at the origin when `p <= 1`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        Ok(standard_pdf(self.p, x / self.b) / self.b)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        Ok(standard_cdf(self.p, x / self.b))
    }

    /// `count` independent draws `b cos(πV) W^{1/p}`.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.random();
        let w: f64 = rng.random();
        self.b * (PI * v).cos() * w.powf(1.0 / self.p)
    }

    /// `E|X|^q` for this (scaled) law.
    pub fn abs_moment(&self, q: f64) -> f64 {
        self.b.powf(q) * ullman_abs_moment(self.p, q)
    }
}

fn pdf_cfg() -> QuadConfig {
    QuadConfig::with_tol(1e-15, 1e-13)
}

/// `h_p(x)` after the substitution `t = sqrt(x² + (1 - x²) u²)`, which turns
/// the inverse-square-root endpoint singularity into the smooth integrand
/// `sqrt(1 - x²) t^{p-2}` on `u ∈ [0, 1]`.
pub(crate) fn standard_pdf(p: f64, x: f64) -> f64 {
    let ax = x.abs();
    if ax >= 1.0 {
        return 0.0;
    }
    if ax == 0.0 {
        return if p > 1.0 { p / (PI * (p - 1.0)) } else { f64::INFINITY };
    }
    if p == 2.0 {
        return 2.0 / PI * (1.0 - x * x).sqrt();
    }
    if p == 1.0 {
        return ((1.0 + (1.0 - ax * ax).sqrt()) / ax).ln() / PI;
    }
    let c = 1.0 - ax * ax;
    let x2 = ax * ax;
    let f = |u: f64| (x2 + c * u * u).powf(0.5 * p - 1.0);
    // the integrand changes scale around u = |x| / sqrt(1 - x²)
    let kink = ax / c.sqrt();
    let r = if kink < 1.0 {
        integrate_with_breaks(f, &[0.0, kink, 1.0], &pdf_cfg())
    } else {
        integrate(f, 0.0, 1.0, &pdf_cfg())
    };
    p / PI * c.sqrt() * r.value
}

/// For `x >= 0`: `1/2 + x^p/2 + (p/π) ∫_x^1 t^{p-1} arcsin(x/t) dt`,
/// obtained by exchanging the order of integration in `∫_0^x h_p`.
pub(crate) fn standard_cdf(p: f64, x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x < 0.0 {
        return 1.0 - standard_cdf(p, -x);
    }
    if x == 0.0 {
        return 0.5;
    }
    if p == 2.0 {
        return 0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI;
    }
    let tail = integrate(|t: f64| t.powf(p - 1.0) * (x / t).min(1.0).asin(), x, 1.0, &pdf_cfg());
    (0.5 + 0.5 * x.powf(p) + p / PI * tail.value).clamp(0.0, 1.0)
}

/// `E|𝕌|^q = (p/(p+q)) Γ((q+1)/2) / (sqrt(π) Γ((q+2)/2))`.
pub fn ullman_abs_moment(p: f64, q: f64) -> f64 {
    let log = (p / (p + q)).ln() + ln_gamma(0.5 * (q + 1.0)) - 0.5 * PI.ln() - ln_gamma(0.5 * (q + 2.0));
    log.exp()
}

/// `λ_p = (2/sqrt(π)) Γ((p+1)/2) / Γ(p/2)`.
pub fn lambda_p(p: f64) -> f64 {
    (2f64.ln() - 0.5 * PI.ln() + ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5 * p)).exp()
}

/// `λ_p` via `(p/π) ∫_{-1}^1 |x|^p / sqrt(1 - x²) dx`, evaluated as
/// `(2p/π) ∫_0^{π/2} sin^p θ dθ`.
pub fn lambda_p_quadrature(p: f64) -> f64 {
    let r = integrate(|th: f64| th.sin().powf(p), 0.0, 0.5 * PI, &QuadConfig::with_tol(1e-15, 1e-14));
    2.0 * p / PI * r.value
}

/// External field `Q_p(x) = |x|^p / λ_p`.
pub fn external_field(p: f64, x: f64) -> f64 {
    x.abs().powf(p) / lambda_p(p)
}

/// Quadrature value of the logarithmic potential against the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub p: f64,
    pub y: f64,
    pub potential_value: f64,
    pub identity_rhs: f64,
    pub abs_error: f64,
}

/// `∫ h_p(x) log|x - y| dx` by quadrature, compared with
/// `|y|^p/λ_p - log 2 - 1/p`.
pub fn log_potential(p: f64, y: f64) -> Result<PotentialReport> {
    ensure_positive("p", p)?;
    ensure_finite("y", y)?;
    if y.abs() > 1.0 {
        return Err(Error::Domain(format!("y = {y} lies outside [-1, 1]")));
    }
    let potential_value = potential_quadrature(p, y, &QuadConfig::with_tol(1e-12, 1e-12));
    let identity_rhs = external_field(p, y) - LN_2 - 1.0 / p;
    Ok(PotentialReport {
        p,
        y,
        potential_value,
        identity_rhs,
        abs_error: (potential_value - identity_rhs).abs(),
    })
}

/// Splits at `x = y` and substitutes `x = y ± s²`, so that the logarithmic
/// singularity becomes the bounded factor `2 s log(s²)`. The density's own
/// singular point `x = 0` is passed as a breakpoint.
fn potential_quadrature(p: f64, y: f64, cfg: &QuadConfig) -> f64 {
    let mut total = 0.0;
    for side in [1.0, -1.0] {
        let len = if side > 0.0 { 1.0 - y } else { 1.0 + y };
        if len <= 0.0 {
            continue;
        }
        let s_max = len.sqrt();
        let f = |s: f64| {
            if s == 0.0 {
                return 0.0;
            }
            let x = y + side * s * s;
            2.0 * s * standard_pdf(p, x) * (s * s).ln()
        };
        // the origin lies on this side when y and the side point opposite ways
        let zero_dist = -side * y;
        let r = if zero_dist > 0.0 && zero_dist < len {
            integrate_with_breaks(f, &[0.0, zero_dist.sqrt(), s_max], cfg)
        } else {
            integrate(f, 0.0, s_max, cfg)
        };
        total += r.value;
    }
    total
}

/// `∬ log|x - y| h_p(x) h_p(y) dx dy = -log 2 - 1/(2p)`.
pub fn free_entropy(p: f64) -> f64 {
    -LN_2 - 0.5 / p
}

/// Nested deterministic quadrature of the double integral, the inner
/// integral being the logarithmic potential evaluated by quadrature.
pub fn free_entropy_quadrature(p: f64) -> Result<f64> {
    ensure_positive("p", p)?;
    let inner = QuadConfig::with_tol(1e-8, 1e-8);
    let outer = QuadConfig::with_tol(1e-7, 1e-7);
    let r = integrate_with_breaks(
        |y: f64| standard_pdf(p, y) * potential_quadrature(p, y, &inner),
        &[-1.0, 0.0, 1.0],
        &outer,
    );
    Ok(r.value)
}

/// Monte Carlo flavours for the free-entropy double integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeEntropyMethod {
    /// Average of `log|X - Y|` over independent Ullman pairs.
    PlainPairs,
    /// The arcsine factor of `X = cos(πV) W^{1/p}` integrated in closed form
    /// given `W`, the remaining three uniforms driven by randomly shifted
    /// Halton points. Standard error from the spread of the shift means.
    ConditionedQmc,
}

const QMC_SHIFTS: usize = 10;
const PAIR_CHUNK: usize = 1 << 16;

/// Stochastic estimate of `∬ log|x - y| h_p(x) h_p(y) dx dy` from `pairs`
/// function evaluations.
pub fn free_entropy_mc(p: f64, pairs: usize, seed: u64, method: FreeEntropyMethod) -> Result<MonteCarloEstimate> {
    ensure_positive("p", p)?;
    let dist = UllmanDist::standard(p)?;
    match method {
        FreeEntropyMethod::PlainPairs => {
            if pairs < 2 {
                return Err(Error::InvalidArgument("need at least two pairs".into()));
            }
            let chunks = pairs.div_ceil(PAIR_CHUNK);
            let values: Vec<f64> = (0..chunks)
                .into_par_iter()
                .flat_map_iter(|c| {
                    let len = PAIR_CHUNK.min(pairs - c * PAIR_CHUNK);
                    let mut rng = stream_rng(seed, c as u64);
                    (0..len)
                        .map(|_| (dist.draw(&mut rng) - dist.draw(&mut rng)).abs().ln())
                        .collect::<Vec<_>>()
                })
                .collect();
            Ok(MonteCarloEstimate::from_samples(&values, seed).with_meta("method", "plain_pairs"))
        }
        FreeEntropyMethod::ConditionedQmc => {
            if pairs < 2 * QMC_SHIFTS {
                return Err(Error::InvalidArgument(format!("need at least {} points", 2 * QMC_SHIFTS)));
            }
            let per_shift = pairs / QMC_SHIFTS;
            let means: Vec<f64> = (0..QMC_SHIFTS)
                .into_par_iter()
                .map(|s| {
                    let mut rng = stream_rng(seed, s as u64);
                    let shift: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                    let mut acc = 0.0;
                    for i in 1..=per_shift as u64 {
                        let u = [
                            shifted(radical_inverse(i, 2), shift[0]),
                            shifted(radical_inverse(i, 3), shift[1]),
                            shifted(radical_inverse(i, 5), shift[2]),
                        ];
                        let half_width = u[0].powf(1.0 / p);
                        let y = (PI * u[1]).cos() * u[2].powf(1.0 / p);
                        acc += arcsine_potential(half_width, y);
                    }
                    acc / per_shift as f64
                })
                .collect();
            let (mean, sd) = mean_std(&means);
            Ok(MonteCarloEstimate::new(mean, sd / (QMC_SHIFTS as f64).sqrt(), per_shift * QMC_SHIFTS, seed)
                .with_meta("method", "conditioned_qmc")
                .with_meta("stderr_estimator", "spread of randomly shifted Halton means")
                .with_meta("shifts", QMC_SHIFTS))
        }
    }
}

fn shifted(u: f64, s: f64) -> f64 {
    let v = u + s;
    let v = if v >= 1.0 { v - 1.0 } else { v };
    v.max(f64::MIN_POSITIVE)
}

/// `∫ log|x - y| dA(x)` for the arcsine law `A` on `[-b, b]`.
fn arcsine_potential(b: f64, y: f64) -> f64 {
    let ay = y.abs();
    if ay <= b {
        (0.5 * b).ln()
    } else {
        (0.5 * (ay + (ay * ay - b * b).sqrt())).ln()
    }
}

/// `ℰ_p(μ) = ∬_{x≠y} log(1/|x - y|) dμ dμ + 2 ∫ Q_p dμ`, with the double sum
/// over ordered off-diagonal pairs weighted `1/(n(n-1))`.
pub fn energy_functional(p: f64, mu: &EmpiricalMeasure) -> Result<f64> {
    ensure_positive("p", p)?;
    let log_energy = mu.off_diagonal_log_energy()?;
    Ok(-log_energy + 2.0 * mu.abs_moment(p) / lambda_p(p))
}

/// `𝒥_p(μ) = ∬_{x≠y} log|x - y| dμ dμ - (1/p) log ∫|x|^p dμ`, invariant
/// under dilations of `μ`.
pub fn j_functional(p: f64, mu: &EmpiricalMeasure) -> Result<f64> {
    ensure_positive("p", p)?;
    let moment = mu.abs_moment(p);
    if moment == 0.0 {
        return Err(Error::Domain("measure is concentrated at the origin".into()));
    }
    Ok(mu.off_diagonal_log_energy()? - moment.ln() / p)
}
