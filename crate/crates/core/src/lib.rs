//! Numerics for unit balls of self-adjoint matrix ensembles in Schatten-type
//! eigenvalue norms.
//!
//! The crate covers the Ullman equilibrium law and its potential identities,
//! the closed-form volume constants, log-Vandermonde machinery and Fekete
//! points, the finite-n variational constant `Δ_n(p)`, samplers for the
//! eigenvalue law of a uniform point of the ball, and Monte Carlo experiments
//! for the associated limit theorems.

pub mod constants;
pub mod delta_opt;
pub mod error;
pub mod experiments;
pub mod measure;
mod linalg;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod ullman;
pub mod vandermonde;

pub use constants::{EnsembleSpec, Exponent};
pub use error::{Error, Result};
pub use measure::EmpiricalMeasure;
pub use stats::MonteCarloEstimate;

/// Natural log of the gamma function.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
