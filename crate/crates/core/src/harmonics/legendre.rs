use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Legendre polynomial `P_ℓ(t)` by the three-term recurrence.
pub fn legendre(ell: usize, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            value: t,
            domain: "[-1, 1]",
        });
    }
    Ok(legendre_unchecked(ell, t))
}

pub(crate) fn legendre_unchecked(ell: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if ell == 0 {
        return p0;
    }
    for k in 1..ell {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Returns `(P_ℓ(t), P'_ℓ(t))` for `|t| < 1`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let p = legendre_unchecked(n, t);
    let q = if n == 0 {
        0.0
    } else {
        legendre_unchecked(n - 1, t)
    };
    (p, n as f64 * (t * p - q) / (t * t - 1.0))
}

/// `∫₀¹ P_ℓ(t) dt`.
///
/// Zero for even `ℓ ≥ 2`; for `ℓ = 2m+1` it equals
/// `(-1)^m (2m)! / (2^{2m+1} m! (m+1)!)`, built here by the exact ratio of
/// consecutive terms `-(2m-1)/(2m+2)`.
pub fn legendre_integral01(ell: usize) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    if ell % 2 == 0 {
        return 0.0;
    }
    let m = (ell - 1) / 2;
    let mut v = 0.5;
    for k in 1..=m {
        v *= -((2 * k - 1) as f64) / ((2 * k + 2) as f64);
    }
    v
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`. Nodes are returned in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        assert_eq!(legendre(0, 0.3).unwrap(), 1.0);
        assert!((legendre(2, 0.5).unwrap() - (3.0 * 0.25 - 1.0) / 2.0).abs() < 1e-15);
        assert!((legendre(2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        assert!((legendre(7, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((legendre(7, -1.0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn domain_error() {
        assert!(matches!(legendre(3, 1.0 + 1e-9), Err(Error::Domain { .. })));
    }

    #[test]
    fn integral01_closed_forms() {
        assert_eq!(legendre_integral01(4), 0.0);
        assert_eq!(legendre_integral01(1), 0.5);
        assert_eq!(legendre_integral01(3), -0.125);
        assert_eq!(legendre_integral01(5), 0.0625);
    }

    #[test]
    fn integral01_matches_gauss_legendre() {
        let (t, w) = gauss_legendre(40);
        for ell in 0..30 {
            // map [-1,1] -> [0,1]
            let q: f64 = t
                .iter()
                .zip(&w)
                .map(|(&t, &w)| 0.5 * w * legendre_unchecked(ell, 0.5 * (t + 1.0)))
                .sum();
            assert!((q - legendre_integral01(ell)).abs() < 1e-14, "ell={ell}");
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..30 {
            let (t, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let q: f64 = t.iter().zip(&w).map(|(&t, &w)| w * t.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }
}
