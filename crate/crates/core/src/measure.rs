use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly weighted atoms on the real line, kept sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("empirical measure needs at least one atom".into()));
        }
        if let Some(bad) = atoms.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite atom {bad}")));
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The image under `x -> c x`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|a| a * c).collect())
    }

    /// `∫ |x|^p dμ`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|a| a.abs().powf(p)).sum::<f64>() / self.len() as f64
    }

    /// `(1/(n(n-1))) Σ_{i≠j} log|x_i - x_j|`. Coincident atoms are an error.
    pub fn off_diagonal_log_energy(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two atoms".into()));
        }
        let mut acc = 0.0;
        for (i, &a) in self.atoms.iter().enumerate() {
            for &b in &self.atoms[i + 1..] {
                let d = b - a;
                if d == 0.0 {
                    return Err(Error::Singularity(format!("duplicate atom {a}")));
                }
                acc += d.ln();
            }
        }
        Ok(2.0 * acc / (n * (n - 1)) as f64)
    }

    /// Empirical distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.partition_point(|&a| a <= x) as f64 / self.len() as f64
    }
}
