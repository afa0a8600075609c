use std::f64::consts::PI;

use num_complex::Complex64;

use super::wigner::wigner_entry;
use crate::error::{Error, Result};
use crate::so3::{section, SpherePoint};

/// Spherical harmonic `Y_{ℓ,m}(x) = √((2ℓ+1)/4π) · conj(D^ℓ_{m,0}(g_x))`,
/// orthonormal on the sphere of mass `4π`.
pub fn sph_harm(ell: usize, m: i32, x: &SpherePoint) -> Result<Complex64> {
    spin_sph_harm(0, ell, m, x)
}

/// Chart value of the spin harmonic `_{-s}Y_{ℓ,m}` at the canonical
/// representative: `√((2ℓ+1)/4π) · conj(D^ℓ_{m,s}(g_x))`.
pub fn spin_sph_harm(s: i32, ell: usize, m: i32, x: &SpherePoint) -> Result<Complex64> {
    if m.unsigned_abs() as usize > ell || (s.unsigned_abs() as usize) > ell {
        return Err(Error::Index {
            ell: ell as i64,
            m: i64::from(m),
            s: i64::from(s),
        });
    }
    let norm = ((2 * ell + 1) as f64 / (4.0 * PI)).sqrt();
    Ok(norm * wigner_entry(ell, m, s, &section(x)).conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::legendre::legendre_unchecked;
    use crate::harmonics::quadrature::QuadratureRule;
    use crate::harmonics::wigner::wigner_entry;
    use crate::so3::{character, KElement};

    #[test]
    fn constant_mode() {
        let x = SpherePoint::new(1.2, 4.0);
        let y = sph_harm(0, 0, &x).unwrap();
        assert!((y - Complex64::new((0.25 / PI).sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zonal_is_legendre() {
        for &(theta, phi) in &[(0.3, 0.0), (1.7, 2.2), (3.0, 5.9)] {
            let x = SpherePoint::new(theta, phi);
            for ell in 0..12 {
                let want = ((2 * ell + 1) as f64 / (4.0 * PI)).sqrt() * legendre_unchecked(ell, theta.cos());
                assert!((sph_harm(ell, 0, &x).unwrap() - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn index_errors() {
        let x = SpherePoint::new(1.0, 1.0);
        assert!(matches!(sph_harm(2, 3, &x), Err(Error::Index { .. })));
        assert!(matches!(spin_sph_harm(3, 2, 0, &x), Err(Error::Index { .. })));
    }

    #[test]
    fn spin_zero_reduces_to_scalar() {
        let x = SpherePoint::new(0.77, 1.9);
        for ell in 0..6 {
            for m in -(ell as i32)..=ell as i32 {
                assert_eq!(spin_sph_harm(0, ell, m, &x).unwrap(), sph_harm(ell, m, &x).unwrap());
            }
        }
    }

    #[test]
    fn spin_orthonormality() {
        let rule = QuadratureRule::sphere(8).unwrap();
        for s in [-2i32, 0, 1] {
            for (l1, m1) in [(2usize, 1i32), (3, -2), (4, 0), (4, 2)] {
                for (l2, m2) in [(2usize, 1i32), (3, -2), (4, 0), (4, 2)] {
                    if (s.unsigned_abs() as usize) > l1.min(l2) {
                        continue;
                    }
                    let ip = rule.integrate(|x| {
                        spin_sph_harm(s, l1, m1, x).unwrap() * spin_sph_harm(s, l2, m2, x).unwrap().conj()
                    });
                    let want = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-10, "s={s} ({l1},{m1}) ({l2},{m2}): {ip}");
                }
            }
        }
    }

    #[test]
    fn representative_change_is_a_character() {
        // conj(D_{m,s}(g k)) = conj(D_{m,s}(g)) · χ_{-s}(k)
        let x = SpherePoint::new(1.1, 0.4);
        let k = KElement::new(0.9);
        let g = section(&x);
        let gk = g.compose(&k.to_rotation());
        for s in [-2, 1, 3] {
            let norm = (7.0 / (4.0 * PI)).sqrt();
            let moved = norm * wigner_entry(3, 1, s, &gk).conj();
            let want = spin_sph_harm(s, 3, 1, &x).unwrap() * character(-s, &k);
            assert!((moved - want).norm() < 1e-12);
        }
    }
}
