//! Eigenvalue laws of uniform points in `𝔹ⁿ_{p,β}`.
//!
//! A uniform matrix in the ball has unordered eigenvalues distributed as
//! `U^{1/(n+m)} X / ‖X‖_p`, where `m = βn(n-1)/2`, `U` is uniform on `(0,1)`
//! and `X` has the log-gas density `∝ e^{-Σ|x_i|^p} ∏_{i<j} |x_i - x_j|^β`.
//! `X` is drawn by Metropolis sweeps in general and exactly from the
//! tridiagonal β-Hermite model when `p = 2`. Since the chain states are
//! exchangeable tuples, no explicit random permutation is applied.

mod ball;
mod hermite;
mod mcmc;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use ball::{classical_ball_point, sample_classical_lp_ball};
pub(crate) use ball::radial_gamma;
pub use hermite::sample_beta_hermite;
pub use mcmc::sample_loggas_mcmc;

use crate::constants::EnsembleSpec;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Sweeps discarded before recording; the proposal scale adapts only here.
    pub burn_in: usize,
    /// Sweeps between recorded states. `None` means `n`.
    pub thinning: Option<usize>,
    /// Initial random-walk scale relative to the expected support radius.
    pub proposal_scale: f64,
    pub target_acceptance: f64,
    pub seed: u64,
    /// Independent chains; the output is ordered by chain id.
    pub chains: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { burn_in: 1000, thinning: None, proposal_scale: 0.1, target_acceptance: 0.44, seed: 0, chains: 4 }
    }
}

impl ChainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.thinning == Some(0) {
            return Err(Error::InvalidArgument("thinning must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidArgument("need at least one chain".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidArgument("target acceptance must lie in (0, 1)".into()));
        }
        crate::error::ensure_positive("proposal_scale", self.proposal_scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSource {
    Mcmc,
    TridiagonalOracle,
    Transform,
}

/// One unordered eigenvalue tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub values: Vec<f64>,
    pub spec: EnsembleSpec,
    pub source: EigenSource,
}

/// Samples together with the diagnostics of the run that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<EigenSample>,
    pub metadata: BTreeMap<String, String>,
    /// Effective sample size of `Σx²`; equal to the count for exact sources.
    pub effective_samples: f64,
    pub acceptance_rate: Option<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|s| s.values.as_slice())
    }
}

/// `-Σ|x_i|^p + β Σ_{i<j} log|x_i - x_j|`; `-∞` when two entries coincide.
pub fn loggas_logdensity(spec: &EnsembleSpec, x: &[f64]) -> Result<f64> {
    let p = spec.finite_p()?;
    if x.len() != spec.n {
        return Err(Error::InvalidArgument(format!("expected {} values, got {}", spec.n, x.len())));
    }
    let mut acc = -x.iter().map(|v| v.abs().powf(p)).sum::<f64>();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = (x[i] - x[j]).abs();
            if d == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            acc += spec.beta * d.ln();
        }
    }
    Ok(acc)
}

/// `u^{1/(n+m)} x / ‖x‖_p`.
pub fn schechtman_zinn_transform(x: &EigenSample, u: f64, p: f64) -> Result<EigenSample> {
    crate::error::ensure_positive("p", p)?;
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidArgument(format!("u must lie in (0, 1], got {u}")));
    }
    let norm = x.values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Domain("cannot normalize the zero vector".into()));
    }
    let radius = u.powf(1.0 / x.spec.dim());
    Ok(EigenSample {
        values: x.values.iter().map(|v| radius * v / norm).collect(),
        spec: x.spec,
        source: EigenSource::Transform,
    })
}

const RADIUS_STREAM_TAG: u64 = 0x5a;

/// Eigenvalue tuples of matrices uniform in `𝔹ⁿ_{p,β}` (finite `p`). The
/// log-gas source is the exact tridiagonal model for `p = 2` and Metropolis
/// sweeps otherwise, recorded under `metadata["base_source"]`.
pub fn sample_unit_ball_eigen(spec: &EnsembleSpec, count: usize, chain: &ChainConfig) -> Result<SampleSet> {
    let p = spec.finite_p()?;
    let base = if p == 2.0 {
        sample_beta_hermite(spec.n, spec.beta, count, chain.seed)?
    } else {
        sample_loggas_mcmc(spec, count, chain)?
    };
    let mut rng = stream_rng(derive_seed(chain.seed, RADIUS_STREAM_TAG), 0);
    let mut samples = Vec::with_capacity(base.samples.len());
    for x in &base.samples {
        let u: f64 = 1.0 - rng.random::<f64>();
        samples.push(schechtman_zinn_transform(x, u, p)?);
    }
    let mut metadata = base.metadata.clone();
    let base_source = if p == 2.0 { "tridiagonal_oracle" } else { "mcmc" };
    metadata.insert("base_source".into(), base_source.into());
    Ok(SampleSet {
        samples,
        metadata,
        effective_samples: base.effective_samples,
        acceptance_rate: base.acceptance_rate,
    })
}

/// Radius `(βn/λ_p)^{1/p}` of the support of the log-gas equilibrium.
pub(crate) fn equilibrium_radius(spec: &EnsembleSpec, p: f64) -> f64 {
    (spec.beta * spec.n as f64 / crate::ullman::lambda_p(p)).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Exponent;

    #[test]
    fn logdensity_examples() {
        let s1 = EnsembleSpec::new(1, 3.0, Exponent::Finite(2.0)).unwrap();
        assert_eq!(loggas_logdensity(&s1, &[1.5]).unwrap(), -2.25);
        let s = EnsembleSpec::new(2, 2.0, Exponent::Finite(2.0)).unwrap();
        let v = loggas_logdensity(&s, &[-1.0, 1.0]).unwrap();
        assert!((v - (-2.0 + 2.0 * 2f64.ln())).abs() < 1e-15);
        assert_eq!(loggas_logdensity(&s, &[0.3, 0.3]).unwrap(), f64::NEG_INFINITY);
        assert!(loggas_logdensity(&s, &[0.3]).is_err());
    }

    #[test]
    fn transform_unit_radius() {
        let spec = EnsembleSpec::new(3, 2.0, Exponent::Finite(3.0)).unwrap();
        let x = EigenSample { values: vec![1.0, -2.0, 0.5], spec, source: EigenSource::Mcmc };
        let y = schechtman_zinn_transform(&x, 1.0, 3.0).unwrap();
        let norm: f64 = y.values.iter().map(|v| v.abs().powi(3)).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        let zero = EigenSample { values: vec![0.0; 3], spec, source: EigenSource::Mcmc };
        assert!(matches!(schechtman_zinn_transform(&zero, 0.5, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn config_validation() {
        let bad = ChainConfig { thinning: Some(0), ..ChainConfig::default() };
        assert!(bad.validate().is_err());
        assert!(ChainConfig::default().validate().is_ok());
    }
}
