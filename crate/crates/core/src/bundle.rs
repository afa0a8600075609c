//! Charts and transition functions of the spin-s line bundle over S².
//!
//! Chart `U_R` is the sphere minus the rotated poles `R·x₀`, `R·x₁`, with
//! representatives `g^R_x = R·g_{R⁻¹x}`. Changing chart from `R₁` to `R₂`
//! multiplies the fiber coordinate by `χ_s(k_{R₂,R₁}(x))`.

use std::fmt::Write as _;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::so3::{character, k_factor, random_point, random_rotation, wrap_signed, Rotation, SpherePoint, POLE_MARGIN};

/// Residual allowed in the angle lemma.
pub const ANGLE_TOL: f64 = 1e-9;
/// Residual allowed in the cocycle identity.
pub const COCYCLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    pub label: Rotation,
}

impl Chart {
    pub fn new(label: Rotation) -> Self {
        Self { label }
    }

    /// `x ∉ {R·x₀, R·x₁}` up to the exclusion radius.
    pub fn contains(&self, x: &SpherePoint) -> bool {
        !self.label.inverse().act(x).near_pole(POLE_MARGIN)
    }
}

/// Unit tangent `ρ` at `base`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub base: SpherePoint,
    pub rho: Vector3<f64>,
}

/// `ρ(y) = (−y₂, y₁, 0)/√(y₁²+y₂²)`, the eastward unit tangent.
pub fn rho(y: &SpherePoint) -> Result<TangentFrame> {
    if y.near_pole(POLE_MARGIN) {
        return Err(Error::ChartDomain);
    }
    let v = y.vector();
    let r = v.x.hypot(v.y);
    Ok(TangentFrame {
        base: *y,
        rho: Vector3::new(-v.y / r, v.x / r, 0.0),
    })
}

/// `ρ_R(x) = R·ρ(R⁻¹x)`.
pub fn rho_in_chart(r: &Rotation, x: &SpherePoint) -> Result<TangentFrame> {
    let t = rho(&r.inverse().act(x))?;
    Ok(TangentFrame {
        base: *x,
        rho: r.apply(&t.rho),
    })
}

/// `λ_{R₂,R₁}(x) = χ_s(k_{R₂,R₁}(x))`.
pub fn transition(s: i32, r2: &Rotation, r1: &Rotation, x: &SpherePoint) -> Result<Complex64> {
    Ok(character(s, &k_factor(r2, r1, x)?))
}

/// Oriented angle from `ρ_{R₁}(x)` to `ρ_{R₂}(x)`, counterclockwise seen from
/// outside the sphere, in `(−π, π]`.
pub fn psi_angle(r2: &Rotation, r1: &Rotation, x: &SpherePoint) -> Result<f64> {
    let a = rho_in_chart(r1, x)?.rho;
    let b = rho_in_chart(r2, x)?.rho;
    Ok(x.vector().dot(&a.cross(&b)).atan2(a.dot(&b)))
}

/// Outcome of a randomized identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleReport {
    pub title: String,
    pub trials: usize,
    pub failures: usize,
    /// Draws rejected for falling outside the chart overlap.
    pub skipped: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl BundleReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# report {:?} n={} entries=1 failures={}",
            self.title, self.trials, self.failures
        )
        .unwrap();
        writeln!(out, "# note skipped={}", self.skipped).unwrap();
        writeln!(
            out,
            "\"max residual\" estimate={} tolerance={} verdict={}",
            fmt_f64(self.max_residual),
            fmt_f64(self.tolerance),
            if self.passed() { "pass" } else { "fail" }
        )
        .unwrap();
        out
    }
}

const MAX_ATTEMPTS_PER_TRIAL: usize = 1000;

fn run_trials<F>(title: &str, trials: usize, seed: u64, tolerance: f64, mut trial: F) -> BundleReport
where
    F: FnMut(&mut ChaCha8Rng) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BundleReport {
        title: title.into(),
        trials: 0,
        failures: 0,
        skipped: 0,
        max_residual: 0.0,
        tolerance,
    };
    while report.trials < trials {
        match trial(&mut rng) {
            Ok(r) => {
                report.trials += 1;
                report.max_residual = report.max_residual.max(r);
                if !(r < tolerance) {
                    report.failures += 1;
                }
            }
            Err(Error::ChartDomain) => {
                report.skipped += 1;
                if report.skipped > MAX_ATTEMPTS_PER_TRIAL * trials.max(1) {
                    break;
                }
            }
            Err(_) => report.failures += 1,
        }
    }
    report
}

/// `|ω + ψ| (mod 2π) < 1e-9` on random `(R₁, R₂, x)`, with `ω` the angle of
/// `k_{R₂,R₁}(x)`.
pub fn verify_angle_lemma(trials: usize, seed: u64) -> BundleReport {
    run_trials("angle lemma omega = -psi", trials, seed, ANGLE_TOL, |rng| {
        let r1 = random_rotation(rng);
        let r2 = random_rotation(rng);
        let x = random_point(rng);
        let omega = k_factor(&r2, &r1, &x)?.gamma();
        let psi = psi_angle(&r2, &r1, &x)?;
        Ok(wrap_signed(omega + psi).abs())
    })
}

/// `|λ_{l,i}·λ_{i,j} − λ_{l,j}| < 1e-10` on random charts and points in the
/// triple overlap.
pub fn verify_cocycle(s: i32, triples: usize, seed: u64) -> BundleReport {
    run_trials(&format!("cocycle s={s}"), triples, seed, COCYCLE_TOL, |rng| {
        let rl = random_rotation(rng);
        let ri = random_rotation(rng);
        let rj = random_rotation(rng);
        let x = random_point(rng);
        let li = transition(s, &rl, &ri, &x)?;
        let ij = transition(s, &ri, &rj, &x)?;
        let lj = transition(s, &rl, &rj, &x)?;
        Ok((li * ij - lj).norm())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn frames_are_tangent_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = random_point(&mut rng);
            let r = random_rotation(&mut rng);
            let t = rho_in_chart(&r, &x).unwrap();
            assert!(t.rho.dot(&x.vector()).abs() < 1e-12);
            assert!((t.rho.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(rho(&SpherePoint::north_pole()), Err(Error::ChartDomain)));
    }

    #[test]
    fn chart_domain() {
        let r = Rotation::about_y(0.5);
        assert!(!Chart::new(r).contains(&r.act(&SpherePoint::north_pole())));
        assert!(!Chart::new(r).contains(&r.act(&SpherePoint::south_pole())));
        assert!(Chart::new(r).contains(&SpherePoint::new(1.0, 1.0)));
    }

    #[test]
    fn transition_basics() {
        let x = SpherePoint::new(1.1, 0.3);
        let r1 = Rotation::from_euler(0.2, 0.5, 1.0);
        let r2 = Rotation::from_euler(2.0, 1.5, 0.3);
        assert!((transition(3, &r1, &r1, &x).unwrap() - 1.0).norm() < 1e-12);
        assert_eq!(transition(0, &r2, &r1, &x).unwrap(), Complex64::new(1.0, 0.0));
        let a = transition(2, &r1, &r2, &x).unwrap();
        let b = transition(2, &r2, &r1, &x).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let minus = transition(-2, &r1, &r2, &x).unwrap();
        assert!((minus - a.conj()).norm() < 1e-12);
        let pole = r1.act(&SpherePoint::north_pole());
        assert!(matches!(transition(1, &r2, &r1, &pole), Err(Error::ChartDomain)));
    }

    #[test]
    fn psi_examples() {
        let x = SpherePoint::new(1.2, 2.0);
        let r = Rotation::from_euler(0.3, 0.9, 2.2);
        assert!(psi_angle(&r, &r, &x).unwrap().abs() < 1e-12);
        for gamma in [0.4, 2.0, -1.3] {
            let r2 = Rotation::about_axis(x.vector(), gamma);
            let psi = psi_angle(&r2, &Rotation::identity(), &x).unwrap();
            assert!(wrap_signed(psi - gamma).abs() < 1e-10, "{psi} vs {gamma}");
            let omega = k_factor(&r2, &Rotation::identity(), &x).unwrap().gamma();
            assert!(wrap_signed(omega + gamma).abs() < 1e-10);
        }
    }

    #[test]
    fn psi_agrees_with_acos_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (r1, r2, x) = (random_rotation(&mut rng), random_rotation(&mut rng), random_point(&mut rng));
            let psi = psi_angle(&r2, &r1, &x).unwrap();
            let a = rho_in_chart(&r1, &x).unwrap().rho;
            let b = rho_in_chart(&r2, &x).unwrap().rho;
            let unsigned = a.dot(&b).clamp(-1.0, 1.0).acos();
            // sign from which side of the plane (x, a) the vector b lies on
            let sign = if x.vector().cross(&a).dot(&b) >= 0.0 { 1.0 } else { -1.0 };
            assert!(wrap_signed(psi - sign * unsigned).abs() < 1e-6);
        }
    }

    #[test]
    fn particular_rotations_give_identity() {
        let x = SpherePoint::new(1.0, 0.7);
        let axis_b = Vector3::z().cross(&x.vector()).normalize();
        let type_a = Rotation::about_z(1.3);
        let type_b = Rotation::about_axis(axis_b, 0.4);
        for (r1, r2) in [(type_a, type_b), (type_b, type_a), (Rotation::about_z(-0.5), type_a)] {
            let k = k_factor(&r2, &r1, &x).unwrap();
            assert!(wrap_signed(k.gamma()).abs() < 1e-10);
            assert!(psi_angle(&r2, &r1, &x).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn randomized_identities() {
        let lemma = verify_angle_lemma(1000, 11);
        assert!(lemma.passed(), "{}", lemma.to_text());
        assert_eq!(lemma.trials, 1000);
        let cocycle = verify_cocycle(2, 500, 12);
        assert!(cocycle.passed(), "{}", cocycle.to_text());
        let identity = transition(2, &Rotation::identity(), &Rotation::identity(), &SpherePoint::new(FRAC_PI_2, PI)).unwrap();
        assert!((identity * identity - 1.0).norm() < 1e-15);
    }
}
