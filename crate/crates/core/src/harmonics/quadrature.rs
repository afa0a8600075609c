use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::legendre::gauss_legendre;
use crate::error::{Error, Result};
use crate::so3::{Rotation, SpherePoint};

/// Largest rule that will be materialized.
pub const DEFAULT_NODE_CAP: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Sphere,
    RotationGroup,
}

impl Domain {
    pub fn total_mass(self) -> f64 {
        match self {
            Domain::Sphere => 4.0 * PI,
            Domain::RotationGroup => 1.0,
        }
    }
}

/// Product rule: Gauss-Legendre in the polar angle, uniform in the azimuthal
/// angle(s). Exact for `D^ℓ_{m,n}·conj(D^{ℓ'}_{m',n'})` with `ℓ, ℓ' ≤ band_limit`.
#[derive(Clone, Debug)]
pub struct QuadratureRule<N> {
    domain: Domain,
    band_limit: usize,
    nodes: Vec<N>,
    weights: Vec<f64>,
}

fn azimuths(band_limit: usize) -> Vec<f64> {
    let n = 2 * band_limit + 2;
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

fn check_cap(nodes: usize, cap: usize) -> Result<()> {
    if nodes > cap {
        return Err(Error::Resource { nodes, cap });
    }
    Ok(())
}

impl<N> QuadratureRule<N> {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&N, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(&N) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.iter().map(|(n, w)| f(n) * w).sum()
    }

    /// Weighted sum of values already sampled at the nodes.
    pub fn integrate_samples(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for a rule with {} nodes",
                samples.len(),
                self.nodes.len()
            )));
        }
        Ok(samples.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}

impl QuadratureRule<SpherePoint> {
    pub fn sphere(band_limit: usize) -> Result<Self> {
        Self::sphere_with_cap(band_limit, DEFAULT_NODE_CAP)
    }

    pub fn sphere_with_cap(band_limit: usize, cap: usize) -> Result<Self> {
        let np = 2 * band_limit + 2;
        check_cap((band_limit + 1).saturating_mul(np), cap)?;
        let (t, w) = gauss_legendre(band_limit + 1);
        let phis = azimuths(band_limit);
        let dphi = TAU / np as f64;
        let mut nodes = Vec::with_capacity(t.len() * np);
        let mut weights = Vec::with_capacity(t.len() * np);
        for (&t, &w) in t.iter().zip(&w) {
            let theta = t.acos();
            for &phi in &phis {
                nodes.push(SpherePoint::new(theta, phi));
                weights.push(w * dphi);
            }
        }
        Ok(Self {
            domain: Domain::Sphere,
            band_limit,
            nodes,
            weights,
        })
    }
}

impl QuadratureRule<Rotation> {
    pub fn rotation_group(band_limit: usize) -> Result<Self> {
        Self::rotation_group_with_cap(band_limit, DEFAULT_NODE_CAP)
    }

    pub fn rotation_group_with_cap(band_limit: usize, cap: usize) -> Result<Self> {
        let na = 2 * band_limit + 2;
        check_cap((band_limit + 1).saturating_mul(na).saturating_mul(na), cap)?;
        let (t, w) = gauss_legendre(band_limit + 1);
        let angles = azimuths(band_limit);
        let scale = 0.5 / (na * na) as f64;
        let mut nodes = Vec::with_capacity(t.len() * na * na);
        let mut weights = Vec::with_capacity(t.len() * na * na);
        for (&t, &w) in t.iter().zip(&w) {
            let beta = t.acos();
            for &alpha in &angles {
                for &gamma in &angles {
                    nodes.push(Rotation::from_euler(alpha, beta, gamma));
                    weights.push(w * scale);
                }
            }
        }
        Ok(Self {
            domain: Domain::RotationGroup,
            band_limit,
            nodes,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::wigner::wigner_entry;

    #[test]
    fn masses() {
        let s = QuadratureRule::sphere(5).unwrap();
        assert!((s.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        assert!((s.integrate(|_| Complex64::new(1.0, 0.0)).re - Domain::Sphere.total_mass()).abs() < 1e-12);
        let g = QuadratureRule::rotation_group(5).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn schur_norms() {
        let rule = QuadratureRule::rotation_group(8).unwrap();
        for ell in 0..=8usize {
            let m = (ell as i32) / 2;
            let n = -(ell as i32);
            let v = rule.integrate(|g| {
                let d = wigner_entry(ell, m, n, g);
                d * d.conj()
            });
            assert!((v.re - 1.0 / (2 * ell + 1) as f64).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
        let cross = rule.integrate(|g| wigner_entry(2, 1, 0, g) * wigner_entry(3, 1, 0, g).conj());
        assert!(cross.norm() < 1e-12);
    }

    #[test]
    fn null_case_and_cap() {
        let rule = QuadratureRule::rotation_group(6).unwrap();
        for ell in 1..=6 {
            let v = rule.integrate(|g| wigner_entry(ell, 1.min(ell as i32), 0, g));
            assert!(v.norm() < 1e-12);
        }
        assert!(matches!(
            QuadratureRule::rotation_group_with_cap(100, 1000),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(QuadratureRule::sphere_with_cap(10, 5), Err(Error::Resource { .. })));
    }
}
