use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{equilibrium_radius, ChainConfig, EigenSample, EigenSource, SampleSet};
use crate::constants::EnsembleSpec;
use crate::error::Result;
use crate::rng::stream_rng;
use crate::stats::integrated_autocorrelation_time;
use crate::vandermonde::gauss_lobatto_nodes;

/// Two points closer than this count as a collision and the move is rejected.
const COLLISION: f64 = 1e-300;

struct ChainOutput {
    states: Vec<Vec<f64>>,
    accepted: u64,
    proposed: u64,
    scale: f64,
    iact: f64,
}

/// Metropolis-within-Gibbs sweeps for the log-gas density
/// `∝ e^{-Σ|x_i|^p} ∏|x_i - x_j|^β`.
///
/// Each sweep proposes a Gaussian move for every coordinate in turn. The
/// proposal scale follows a Robbins–Monro recursion toward
/// `target_acceptance` during burn-in and is frozen afterwards. `count`
/// states are split across `chain.chains` independent streams and returned
/// in chain order.
pub fn sample_loggas_mcmc(spec: &EnsembleSpec, count: usize, chain: &ChainConfig) -> Result<SampleSet> {
    chain.validate()?;
    let p = spec.finite_p()?;
    let chains = chain.chains.min(count.max(1));
    let thinning = chain.thinning.unwrap_or(spec.n).max(1);
    let outputs: Vec<ChainOutput> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let len = count / chains + usize::from(c < count % chains);
            run_chain(spec, p, len, thinning, chain, c as u64)
        })
        .collect::<Result<_>>()?;

    let accepted: u64 = outputs.iter().map(|o| o.accepted).sum();
    let proposed: u64 = outputs.iter().map(|o| o.proposed).sum();
    let acceptance = if proposed > 0 { accepted as f64 / proposed as f64 } else { f64::NAN };
    let effective: f64 = outputs.iter().map(|o| o.states.len() as f64 / o.iact).sum();
    let mut metadata = BTreeMap::new();
    metadata.insert("sampler".into(), "single-site gaussian random-walk metropolis".into());
    metadata.insert("chains".into(), chains.to_string());
    metadata.insert("burn_in".into(), chain.burn_in.to_string());
    metadata.insert("thinning".into(), thinning.to_string());
    metadata.insert("acceptance_rate".into(), format!("{acceptance}"));
    let scales: Vec<String> = outputs.iter().map(|o| format!("{}", o.scale)).collect();
    metadata.insert("proposal_scales".into(), scales.join(","));
    let iacts: Vec<String> = outputs.iter().map(|o| format!("{}", o.iact)).collect();
    metadata.insert("iact_sum_sq".into(), iacts.join(","));
    metadata.insert("effective_samples".into(), format!("{effective}"));

    let samples = outputs
        .into_iter()
        .flat_map(|o| o.states)
        .map(|values| EigenSample { values, spec: *spec, source: EigenSource::Mcmc })
        .collect();
    Ok(SampleSet { samples, metadata, effective_samples: effective, acceptance_rate: Some(acceptance) })
}

fn run_chain(spec: &EnsembleSpec, p: f64, len: usize, thinning: usize, cfg: &ChainConfig, id: u64) -> Result<ChainOutput> {
    let n = spec.n;
    let beta = spec.beta;
    let mut rng = stream_rng(cfg.seed, id);
    let radius = equilibrium_radius(spec, p);
    let mut x = if n == 1 { vec![0.0] } else { gauss_lobatto_nodes(n)?.points };
    x.iter_mut().for_each(|v| *v *= 0.9 * radius);
    let mut log_scale = (cfg.proposal_scale * radius).ln();

    let sweep = |x: &mut [f64], scale: f64, rng: &mut crate::rng::StreamRng| -> u64 {
        let mut acc = 0;
        for k in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let y = x[k] + scale * z;
            let mut delta = x[k].abs().powf(p) - y.abs().powf(p);
            let mut collided = false;
            for (i, &xi) in x.iter().enumerate() {
                if i == k {
                    continue;
                }
                let dn = (y - xi).abs();
                if dn < COLLISION {
                    collided = true;
                    break;
                }
                delta += beta * (dn / (x[k] - xi).abs()).ln();
            }
            if collided {
                continue;
            }
            if delta >= 0.0 || rng.random::<f64>().ln() < delta {
                x[k] = y;
                acc += 1;
            }
        }
        acc
    };

    for t in 0..cfg.burn_in {
        let acc = sweep(&mut x, log_scale.exp(), &mut rng);
        let rate = acc as f64 / n as f64;
        log_scale += (rate - cfg.target_acceptance) / ((t + 1) as f64).powf(0.6);
    }
    let scale = log_scale.exp();
    let mut states = Vec::with_capacity(len);
    let mut accepted = 0;
    let mut proposed = 0;
    for _ in 0..len {
        for _ in 0..thinning {
            accepted += sweep(&mut x, scale, &mut rng);
            proposed += n as u64;
        }
        states.push(x.clone());
    }
    let series: Vec<f64> = states.iter().map(|s| s.iter().map(|v| v * v).sum()).collect();
    let iact = integrated_autocorrelation_time(&series);
    Ok(ChainOutput { states, accepted, proposed, scale, iact })
}
