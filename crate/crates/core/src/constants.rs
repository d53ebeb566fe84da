//! Closed-form constants: the Weyl normalization `c_{n,β}`, the limit `Δ(p)`,
//! moment ratios, the intersection threshold, and the volume asymptotics.
//! Gamma products are always formed in the log domain.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::ln_gamma;
use crate::ullman::{free_entropy, ullman_abs_moment};

/// A norm exponent in `(0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        ensure_positive("p", p)?;
        Ok(Self::Finite(p))
    }

    /// `1/p`, zero at infinity.
    pub fn recip(self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            Self::Finite(p) => Some(p),
            Self::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    fn validate(self) -> Result<Self> {
        match self {
            Self::Finite(p) => Self::finite(p),
            Self::Infinity => Ok(self),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {s:?}")))?;
                if p.is_infinite() && p > 0.0 {
                    return Ok(Self::Infinity);
                }
                Self::finite(p)
            }
        }
    }
}

/// Matrix size `n`, Dyson index `β` and norm exponent `p` of the ball `𝔹ⁿ_{p,β}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub beta: f64,
    pub p: Exponent,
}

impl EnsembleSpec {
    pub fn new(n: usize, beta: f64, p: Exponent) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        ensure_positive("beta", beta)?;
        Ok(Self { n, beta, p: p.validate()? })
    }

    /// `m = βn(n-1)/2`, the off-diagonal real dimension.
    pub fn m(&self) -> f64 {
        self.beta * (self.n * (self.n - 1)) as f64 / 2.0
    }

    /// Real dimension `n + βn(n-1)/2` of the matrix space.
    pub fn dim(&self) -> f64 {
        self.n as f64 + self.m()
    }

    pub fn finite_p(&self) -> Result<f64> {
        self.p
            .as_finite()
            .ok_or_else(|| Error::Unsupported("this operation needs a finite p".into()))
    }
}

/// `log c_{n,β}`, the constant in `vol(𝔹ⁿ_{p,β}) = c_{n,β} I_{n,β,p}`:
///
/// `c_{n,β} = (1/n!) (2π^{β/2}/Γ(β/2))^{-n} ∏_{k=1}^n 2(2π)^{βk/2} / (2^{β/2} Γ(βk/2))`.
pub fn log_c_n_beta(n: usize, beta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    ensure_positive("beta", beta)?;
    let half = 0.5 * beta;
    let ln_2pi = (2.0 * PI).ln();
    let sphere = LN_2 + half * PI.ln() - ln_gamma(half);
    let mut acc = -ln_gamma(n as f64 + 1.0) - n as f64 * sphere;
    for k in 1..=n {
        let k = k as f64;
        acc += LN_2 + half * k * ln_2pi - half * LN_2 - ln_gamma(half * k);
    }
    Ok(acc)
}

/// `log Δ(p)`; `Δ(∞) = 1/2` and otherwise
/// `Δ(p) = (1/2) (p sqrt(π) Γ(p/2) / (sqrt(e) Γ((p+1)/2)))^{1/p}`.
pub fn log_delta_p(p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => -LN_2,
        Exponent::Finite(p) => {
            -LN_2 + (p.ln() + 0.5 * PI.ln() + ln_gamma(0.5 * p) - 0.5 - ln_gamma(0.5 * (p + 1.0))) / p
        }
    }
}

pub fn delta_p_closed_form(p: Exponent) -> f64 {
    log_delta_p(p).exp()
}

/// `Δ(p)` as `exp(free entropy - (1/p) log E|𝕌|^p)`.
pub fn delta_p_entropy_route(p: f64) -> f64 {
    (free_entropy(p) - ullman_abs_moment(p, p).ln() / p).exp()
}

/// Support radius of the rescaled Ullman limit of the log-gas,
/// `b_p = (p sqrt(π) Γ(p/2) / Γ((p+1)/2))^{1/p}`.
pub fn b_p(p: f64) -> Result<f64> {
    ensure_positive("p", p)?;
    Ok(((p.ln() + 0.5 * PI.ln() + ln_gamma(0.5 * p) - ln_gamma(0.5 * (p + 1.0))) / p).exp())
}

/// `C_{p,q} = (E|𝕌|^q)^{1/q} / (E|𝕌|^p)^{1/p}` for `𝕌 ~ 𝒰(p)`.
pub fn c_pq(p: f64, q: f64) -> Result<f64> {
    ensure_positive("p", p)?;
    ensure_positive("q", q)?;
    Ok((ullman_abs_moment(p, q).ln() / q - ullman_abs_moment(p, p).ln() / p).exp())
}

/// `a_p(β) = Δ(p)^β (4π/β)^{β/2} e^{3β/4}`.
pub fn a_p_beta(p: Exponent, beta: f64) -> Result<f64> {
    ensure_positive("beta", beta)?;
    Ok((beta * log_delta_p(p) + 0.5 * beta * (4.0 * PI / beta).ln() + 0.75 * beta).exp())
}

/// `a_{p,q} = (a_q(β)/a_p(β))^{1/β} = Δ(q)/Δ(p)`.
pub fn a_pq(p: Exponent, q: Exponent) -> f64 {
    (log_delta_p(q) - log_delta_p(p)).exp()
}

/// `e^{1/(2p) - 1/(2q)} (2p/(p+q))^{1/q}`, the critical dilation for the
/// intersection of volume-normalized balls. Equal exponents are rejected
/// with the formal value 1 attached to the error.
pub fn intersection_threshold(p: f64, q: f64) -> Result<f64> {
    ensure_positive("p", p)?;
    ensure_positive("q", q)?;
    if p == q {
        return Err(Error::DegenerateExponents { p, fallback: 1.0 });
    }
    Ok((0.5 / p - 0.5 / q + (2.0 * p / (p + q)).ln() / q).exp())
}

/// The classical threshold `A_{p,q}` for intersections of `ℓ_p^n` balls.
pub fn a_pq_classical(p: Exponent, q: Exponent) -> Result<f64> {
    let q = match q {
        Exponent::Infinity => return Err(Error::Unsupported("A_pq is not defined for q = ∞".into())),
        Exponent::Finite(q) => q,
    };
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must lie in [1, ∞), got {q}")));
    }
    match p {
        Exponent::Infinity => Ok((-ln_gamma(1.0 + 1.0 / q) + ((q + 1.0) / (q * std::f64::consts::E)).ln() / q).exp()),
        Exponent::Finite(p) => {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!("p must lie in [1, ∞], got {p}")));
            }
            if p == q {
                return Err(Error::DegenerateExponents { p, fallback: 1.0 });
            }
            let log = (1.0 + 1.0 / q) * ln_gamma(1.0 + 1.0 / p)
                - ln_gamma(1.0 + 1.0 / q)
                - ln_gamma((q + 1.0) / p) / q
                + 1.0 / p
                - 1.0 / q
                + (p / q).ln() / q;
            Ok(log.exp())
        }
    }
}

/// Label carried by every value of the volume asymptotics.
pub const SURROGATE_LABEL: &str = "asymptotic surrogate";

/// Right-hand side of the volume asymptotics evaluated at a finite `n`.
/// Not an exact volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSurrogate {
    /// Surrogate for `vol(𝔹ⁿ_{p,β})^{2/n²}`.
    pub value: f64,
    /// Surrogate for `vol(𝔹ⁿ_{p,β})^{2/(βn²)}`, the `β`-th root of `value`.
    pub beta_root_value: f64,
    pub label: &'static str,
}

/// `n^{-β(1/p+1/2)} Δ(p)^β (4π/β)^{β/2} e^{3β/4}` together with the
/// `β`-root form `n^{-(1/p+1/2)} 2Δ(p) (π/β)^{1/2} e^{3/4}`.
pub fn asymptotic_volume_radius(spec: &EnsembleSpec) -> Result<AsymptoticSurrogate> {
    let n = spec.n as f64;
    let beta = spec.beta;
    let rate = spec.p.recip() + 0.5;
    let value = (-beta * rate * n.ln()).exp() * a_p_beta(spec.p, beta)?;
    let beta_root_value =
        (-rate * n.ln() + LN_2 + log_delta_p(spec.p) + 0.5 * (PI / beta).ln() + 0.75).exp();
    Ok(AsymptoticSurrogate { value, beta_root_value, label: SURROGATE_LABEL })
}

/// Exponent `2/(n(n-1)β + 2n)` turning a volume into a radius.
pub fn volume_normalization_exponent(spec: &EnsembleSpec) -> f64 {
    let n = spec.n as f64;
    2.0 / (n * (n - 1.0) * spec.beta + 2.0 * n)
}
