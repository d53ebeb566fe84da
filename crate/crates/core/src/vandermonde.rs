//! Log-Vandermonde products, Gauss–Lobatto Chebyshev nodes and Fekete points
//! of `[-1, 1]`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigenvalues;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    GaussLobatto,
    Fekete,
    Generic,
}

/// Strictly increasing points on the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub points: Vec<f64>,
    pub kind: NodeKind,
}

/// `Σ_{i<j} log|t_j - t_i|`. Needs at least two pairwise distinct points.
pub fn log_vandermonde(points: &[f64]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let mut acc = 0.0;
    for (i, &a) in points.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite point {a}")));
        }
        for &b in &points[i + 1..] {
            let d = (b - a).abs();
            if d == 0.0 {
                return Err(Error::Singularity(format!("repeated point {a}")));
            }
            acc += d.ln();
        }
    }
    Ok(acc)
}

/// `-cos((j-1)π/(n-1))`, `j = 1..n`, written as a sine of a symmetric
/// argument so that the set is exactly symmetric about zero.
pub fn gauss_lobatto_nodes(n: usize) -> Result<NodeSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let denom = 2.0 * (n - 1) as f64;
    let points = (0..n)
        .map(|j| {
            let k = 2 * j as i64 - (n as i64 - 1);
            (PI * k as f64 / denom).sin()
        })
        .collect();
    Ok(NodeSet { points, kind: NodeKind::GaussLobatto })
}

/// `log ∏_{k<l} (t̃_l - t̃_k) = (n + 1 - n²/2) log 2 + (n/2) log(n - 1)`.
pub fn gl_vandermonde_log_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0 - 0.5 * nf * nf) * LN_2 + 0.5 * nf * (nf - 1.0).ln()
}

/// Absolute gap between the summed log-Vandermonde at the Gauss–Lobatto
/// nodes and its closed form.
pub fn gl_vandermonde_identity_gap(n: usize) -> Result<f64> {
    let nodes = gauss_lobatto_nodes(n)?;
    Ok((log_vandermonde(&nodes.points)? - gl_vandermonde_log_closed_form(n)).abs())
}

/// `±1` together with the zeros of the Jacobi polynomial `P^{(1,1)}_{n-2}`,
/// the latter as eigenvalues of its symmetric recurrence matrix.
pub fn fekete_points(n: usize) -> Result<NodeSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let m = n - 2;
    let mut interior = if m == 0 {
        vec![]
    } else {
        let off: Vec<f64> = (1..m)
            .map(|k| {
                let k = k as f64;
                (k * (k + 2.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0))).sqrt()
            })
            .collect();
        symmetric_tridiagonal_eigenvalues(&vec![0.0; m], &off)?
    };
    // the zero set is symmetric; average mirrored pairs to make it exact
    let sym: Vec<f64> = (0..m).map(|i| 0.5 * (interior[i] - interior[m - 1 - i])).collect();
    interior = sym;
    let mut points = Vec::with_capacity(n);
    points.push(-1.0);
    points.extend(interior);
    points.push(1.0);
    Ok(NodeSet { points, kind: NodeKind::Fekete })
}

/// `δ_k = (∏_{i<j} |t_j - t_i|)^{2/(k(k-1))}` at the Fekete points.
pub fn k_diameter(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2, got {k}")));
    }
    if k == 2 {
        // the diameter of [-1, 1]
        return Ok(2.0);
    }
    let pts = fekete_points(k)?;
    let pairs = (k * (k - 1)) as f64 / 2.0;
    Ok((log_vandermonde(&pts.points)? / pairs).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products() {
        assert!((log_vandermonde(&[-1.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
        assert!((log_vandermonde(&[-1.0, 0.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
        assert!(matches!(log_vandermonde(&[0.5, 0.5]), Err(Error::Singularity(_))));
        assert!(log_vandermonde(&[1.0]).is_err());
    }

    #[test]
    fn lobatto_nodes_small_n() {
        assert_eq!(gauss_lobatto_nodes(2).unwrap().points, vec![-1.0, 1.0]);
        assert_eq!(gauss_lobatto_nodes(3).unwrap().points, vec![-1.0, 0.0, 1.0]);
        let five = gauss_lobatto_nodes(5).unwrap().points;
        let h = 0.5f64.sqrt();
        for (a, b) in five.iter().zip([-1.0, -h, 0.0, h, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(gauss_lobatto_nodes(1).is_err());
    }

    #[test]
    fn fekete_small_n() {
        assert_eq!(fekete_points(2).unwrap().points, vec![-1.0, 1.0]);
        assert_eq!(fekete_points(3).unwrap().points, vec![-1.0, 0.0, 1.0]);
        // P_2^{(1,1)} ∝ 5x² - 1
        let f = fekete_points(4).unwrap().points;
        assert!((f[2] - 0.2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn diameter_two() {
        assert_eq!(k_diameter(2).unwrap(), 2.0);
        assert!((k_diameter(3).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }
}
