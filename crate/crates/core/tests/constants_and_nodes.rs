use std::f64::consts::{E, LN_2, PI};

use mbl_core::constants::*;
use mbl_core::vandermonde::*;
use mbl_core::Error;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

/// `log c_{n,β}` from the Gaussian integral over Hermitian-type matrices
/// (Hilbert–Schmidt Lebesgue measure) divided by Mehta's integral.
fn log_c_mehta(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    let dim = nf + beta * nf * (nf - 1.0) / 2.0;
    let ln_2pi = (2.0 * PI).ln();
    let mehta: f64 = (1..=n).map(|j| ln_gamma(1.0 + j as f64 * beta / 2.0) - ln_gamma(1.0 + beta / 2.0)).sum();
    0.5 * dim * ln_2pi - 0.5 * nf * ln_2pi - mehta
}

#[test]
fn c_n_beta_matches_mehta() {
    for beta in [0.5, 1.0, 2.0, 4.0, 7.0] {
        for n in 1..=10 {
            let got = log_c_n_beta(n, beta).unwrap();
            let want = log_c_mehta(n, beta);
            assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "n={n} β={beta}: {got} vs {want}");
        }
    }
    // 2×2 real symmetric by hand: π/√2
    assert!((log_c_n_beta(2, 1.0).unwrap() - (PI / 2f64.sqrt()).ln()).abs() < 1e-14);
    assert!(log_c_n_beta(0, 1.0).is_err());
}

#[test]
fn exact_constant_values() {
    let fin = |p| Exponent::Finite(p);
    assert!((delta_p_closed_form(fin(2.0)) - (-0.25f64).exp()).abs() < 1e-14);
    assert!((delta_p_closed_form(fin(1.0)) - PI / (2.0 * E.sqrt())).abs() < 1e-14);
    assert_eq!(delta_p_closed_form(Exponent::Infinity), 0.5);
    assert!((log_delta_p(fin(1e9)) + LN_2).abs() < 1e-7);
    assert!((b_p(2.0).unwrap() - 2.0).abs() < 1e-14);
    assert!((b_p(1.0).unwrap() - PI).abs() < 1e-14);
    assert!((b_p(4.0).unwrap() - (16.0f64 / 3.0).powf(0.25)).abs() < 1e-14);
    assert!((c_pq(2.0, 4.0).unwrap() - 2f64.powf(0.25)).abs() < 1e-14);
    assert!((c_pq(3.0, 3.0).unwrap() - 1.0).abs() < 1e-14);
    let t = intersection_threshold(1.0, 2.0).unwrap();
    assert!((t - (0.25f64).exp() * (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    assert!((a_pq_classical(fin(1.0), fin(2.0)).unwrap() - E.sqrt() / PI.sqrt()).abs() < 1e-14);
    assert!((a_pq_classical(Exponent::Infinity, fin(2.0)).unwrap() - (6.0 / (PI * E)).sqrt()).abs() < 1e-14);
    assert!(a_pq_classical(fin(1.0), Exponent::Infinity).is_err());
}

#[test]
fn delta_routes_agree() {
    for p in [0.25, 0.5, 1.0, 2.0, 3.0, 10.0, 64.0] {
        let a = delta_p_closed_form(Exponent::Finite(p));
        assert!((a - delta_p_entropy_route(p)).abs() < 1e-12 * a, "p={p}");
    }
}

#[test]
fn equal_exponents_are_degenerate() {
    match intersection_threshold(3.0, 3.0) {
        Err(Error::DegenerateExponents { fallback, .. }) => assert_eq!(fallback, 1.0),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        a_pq_classical(Exponent::Finite(2.0), Exponent::Finite(2.0)),
        Err(Error::DegenerateExponents { .. })
    ));
}

#[test]
fn a_pq_is_beta_free() {
    let (p, q) = (Exponent::Finite(1.5), Exponent::Finite(5.0));
    for beta in [0.5, 1.0, 2.0, 4.0, 9.0] {
        let ratio = (a_p_beta(q, beta).unwrap() / a_p_beta(p, beta).unwrap()).powf(1.0 / beta);
        assert!((ratio - a_pq(p, q)).abs() < 1e-13 * ratio);
    }
}

#[test]
fn surrogate_root_conventions_agree() {
    for p in [Exponent::Finite(0.7), Exponent::Finite(2.0), Exponent::Infinity] {
        for beta in [1.0, 2.0, 4.0] {
            for n in [2, 10, 300] {
                let spec = EnsembleSpec::new(n, beta, p).unwrap();
                let s = asymptotic_volume_radius(&spec).unwrap();
                assert!((s.value.powf(1.0 / beta) - s.beta_root_value).abs() < 1e-12 * s.beta_root_value);
                assert_eq!(s.label, SURROGATE_LABEL);
            }
        }
    }
}

/// Exact `vol(𝔹ⁿ_{2,β})^{2/n²}` from Mehta's integral and polar coordinates.
fn exact_log_volume_p2(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    let dim = nf + beta * nf * (nf - 1.0) / 2.0;
    let mehta: f64 = (1..=n).map(|j| ln_gamma(1.0 + j as f64 * beta / 2.0) - ln_gamma(1.0 + beta / 2.0)).sum();
    let log_gauss = -0.5 * dim * LN_2 + 0.5 * nf * (2.0 * PI).ln() + mehta;
    log_c_mehta(n, beta) + log_gauss - ln_gamma(1.0 + dim / 2.0)
}

#[test]
fn surrogate_ratio_tends_to_one_for_p2() {
    for beta in [1.0, 2.0, 4.0] {
        let mut last = f64::INFINITY;
        for n in [10, 40, 160, 640, 2560] {
            let spec = EnsembleSpec::new(n, beta, Exponent::Finite(2.0)).unwrap();
            let exact = (2.0 / (n * n) as f64 * exact_log_volume_p2(n, beta)).exp();
            let ratio = asymptotic_volume_radius(&spec).unwrap().value / exact;
            let gap = (ratio - 1.0).abs();
            assert!(gap < last, "β={beta} n={n}: ratio {ratio}");
            last = gap;
        }
        assert!(last < 0.01, "β={beta}: {last}");
    }
}

#[test]
fn normalization_exponent() {
    let spec = EnsembleSpec::new(4, 2.0, Exponent::Finite(2.0)).unwrap();
    assert!((volume_normalization_exponent(&spec) - 1.0 / 16.0).abs() < 1e-16);
    assert_eq!(spec.dim(), 16.0);
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let r = (k + 1..n).find(|&r| !a[r][k].is_zero()).expect("singular");
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    &a[n - 1][n - 1] * sign
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    (x.abs() >> shift).to_f64().unwrap().ln() + shift as f64 * LN_2
}

#[test]
fn log_vandermonde_matches_exact_determinant() {
    let pts: Vec<i64> = vec![-41, -37, -30, -22, -19, -11, -6, -2, 0, 3, 5, 9, 14, 18, 25, 28, 33, 39, 44, 50];
    let rows: Vec<Vec<BigInt>> = pts.iter().map(|&x| (0..pts.len() as u32).map(|j| BigInt::from(x).pow(j)).collect()).collect();
    let det = bareiss_det(rows);
    let want = big_ln(&det);
    let got = log_vandermonde(&pts.iter().map(|&x| x as f64).collect::<Vec<_>>()).unwrap();
    assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
}

#[test]
fn lobatto_identity_holds() {
    for n in 2..=50 {
        assert!(gl_vandermonde_identity_gap(n).unwrap() < 1e-9, "n={n}");
    }
}

/// `P'_k(x)` via `(1 - x²) P'_k = k (P_{k-1} - x P_k)`.
fn legendre_derivative(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    for j in 1..k {
        let j = j as f64;
        let p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    k as f64 * (p0 - x * p1) / (1.0 - x * x)
}

#[test]
fn fekete_interior_are_legendre_critical_points() {
    for n in [5, 12, 30] {
        let pts = fekete_points(n).unwrap().points;
        let scale = (0..200).map(|i| legendre_derivative(n - 1, -0.99 + 0.0099 * i as f64).abs()).fold(0.0, f64::max);
        for &x in &pts[1..n - 1] {
            assert!(legendre_derivative(n - 1, x).abs() < 1e-10 * scale, "n={n} x={x}");
        }
    }
}

#[test]
fn fekete_beats_lobatto() {
    for n in 3..=30 {
        let f = log_vandermonde(&fekete_points(n).unwrap().points).unwrap();
        let g = log_vandermonde(&gauss_lobatto_nodes(n).unwrap().points).unwrap();
        assert!(f >= g - 1e-12, "n={n}");
    }
}

#[test]
fn fekete_is_locally_optimal() {
    for n in [4, 9, 20] {
        let pts = fekete_points(n).unwrap().points;
        let base = log_vandermonde(&pts).unwrap();
        for i in 1..n - 1 {
            for h in [1e-4, -1e-4] {
                let mut q = pts.clone();
                q[i] += h;
                assert!(log_vandermonde(&q).unwrap() < base, "n={n} i={i} h={h}");
            }
        }
    }
}

#[test]
fn k_diameters_decrease_to_capacity() {
    let ds: Vec<f64> = (2..=50).map(|k| k_diameter(k).unwrap()).collect();
    assert!(ds.windows(2).all(|w| w[1] <= w[0]));
    assert!(ds.iter().all(|&d| d > 0.5));
    assert!(ds[48] < 0.6, "{}", ds[48]);
}

proptest! {
    #[test]
    fn log_vandermonde_permutation_invariant(mut v in proptest::collection::vec(-10.0f64..10.0, 2..25), seed in 0u64..1000) {
        let base = log_vandermonde(&v);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let n = v.len();
        for i in (1..n).rev() {
            v.swap(i, (seed as usize * 31 + i * 17) % (i + 1));
        }
        prop_assert!((log_vandermonde(&v).unwrap() - base).abs() < 1e-10 * (1.0 + base.abs()));
    }

    #[test]
    fn threshold_collapses_to_one(p in 0.25f64..64.0, q in 0.25f64..64.0) {
        prop_assume!((p - q).abs() > 1e-9);
        let t = intersection_threshold(p, q).unwrap();
        let b = c_pq(p, q).unwrap() * a_pq(Exponent::Finite(p), Exponent::Finite(q));
        prop_assert!((t / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constants_are_finite_and_positive(p in 0.25f64..64.0, q in 0.25f64..64.0, beta in 0.25f64..16.0) {
        let fp = Exponent::Finite(p);
        for v in [delta_p_closed_form(fp), b_p(p).unwrap(), c_pq(p, q).unwrap(), a_p_beta(fp, beta).unwrap(), a_pq(fp, Exponent::Finite(q))] {
            prop_assert!(v.is_finite() && v > 0.0);
        }
        prop_assert!(delta_p_closed_form(fp) > 0.5);
    }
}
