use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::constants::Exponent;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};

const CHUNK: usize = 4096;

/// Fills `out` with a uniform point of the classical ball `𝔹_p^n`:
/// generalized-Gaussian coordinates with density `∝ e^{-|x|^p}`, projected to
/// the sphere and pulled in by `U^{1/n}`. The cube for `p = ∞`.
pub fn classical_ball_point(rng: &mut StreamRng, p: Exponent, gamma: Option<&Gamma<f64>>, out: &mut [f64]) {
    let n = out.len();
    match (p, gamma) {
        (Exponent::Finite(p), Some(gamma)) => {
            let mut norm = 0.0;
            for v in out.iter_mut() {
                let g: f64 = gamma.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                *v = sign * g.powf(1.0 / p);
                norm += g;
            }
            let u: f64 = 1.0 - rng.random::<f64>();
            let r = u.powf(1.0 / n as f64) / norm.powf(1.0 / p);
            out.iter_mut().for_each(|v| *v *= r);
        }
        _ => out.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)),
    }
}

/// Gamma law of `|X|^p` for the generalized Gaussian, or `None` at `p = ∞`.
pub(crate) fn radial_gamma(p: Exponent) -> Result<Option<Gamma<f64>>> {
    match p {
        Exponent::Infinity => Ok(None),
        Exponent::Finite(p) => Gamma::new(1.0 / p, 1.0).map(Some).map_err(|e| Error::InvalidArgument(e.to_string())),
    }
}

/// `count` uniform points of `𝔹_p^n`.
pub fn sample_classical_lp_ball(n: usize, p: Exponent, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let gamma = radial_gamma(p)?;
    let chunks = count.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let len = CHUNK.min(count - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            (0..len)
                .map(|_| {
                    let mut v = vec![0.0; n];
                    classical_ball_point(&mut rng, p, gamma.as_ref(), &mut v);
                    v
                })
                .collect::<Vec<_>>()
        })
        .collect())
}
