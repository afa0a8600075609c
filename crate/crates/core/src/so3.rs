//! The rotation group SO(3), its north-pole isotropy subgroup K ≅ SO(2),
//! the characters of K, and the canonical coset section `x ↦ g_x`.
//!
//! Rotations are parametrized by z-y-z Euler angles: `R = Rz(α)·Ry(β)·Rz(γ)`
//! with `α, γ ∈ [0, 2π)` and `β ∈ [0, π]`. The 3×3 matrix is cached and is
//! authoritative for the action on vectors; the angles are authoritative for
//! Wigner matrices. At gimbal lock (`β ∈ {0, π}`) the angles are folded so
//! that `γ = 0`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pole exclusion radius used by chart-domain checks.
pub const POLE_MARGIN: f64 = 1e-9;

// sin β below this counts as gimbal lock.
const GIMBAL_EPS: f64 = 1e-12;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn ry(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// An element of SO(3).
#[derive(Clone, Copy, PartialEq)]
pub struct Rotation {
    alpha: f64,
    beta: f64,
    gamma: f64,
    matrix: Matrix3<f64>,
}

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rotation")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .finish()
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            matrix: Matrix3::identity(),
        }
    }

    /// Builds `Rz(alpha)·Ry(beta)·Rz(gamma)`; any real angles are accepted and
    /// brought to canonical ranges.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        let mut b = wrap_angle(beta);
        let (mut a, mut g) = (alpha, gamma);
        if b > PI {
            // Ry(-θ) = Rz(π) Ry(θ) Rz(-π)
            b = TAU - b;
            a += PI;
            g += PI;
        }
        if b < GIMBAL_EPS {
            a += g;
            g = 0.0;
            b = 0.0;
        } else if PI - b < GIMBAL_EPS {
            a -= g;
            g = 0.0;
            b = PI;
        }
        let (a, g) = (wrap_angle(a), wrap_angle(g));
        Self {
            alpha: a,
            beta: b,
            gamma: g,
            matrix: rz(a) * ry(b) * rz(g),
        }
    }

    /// Wraps an orthogonal matrix with determinant +1 and recovers its
    /// canonical Euler angles.
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        let sb = m[(0, 2)].hypot(m[(1, 2)]);
        let beta = sb.atan2(m[(2, 2)]);
        let (alpha, gamma) = if sb < GIMBAL_EPS {
            if m[(2, 2)] > 0.0 {
                (m[(1, 0)].atan2(m[(0, 0)]), 0.0)
            } else {
                ((-m[(1, 0)]).atan2(-m[(0, 0)]), 0.0)
            }
        } else {
            (m[(1, 2)].atan2(m[(0, 2)]), m[(2, 1)].atan2(-m[(2, 0)]))
        };
        let beta = if sb < GIMBAL_EPS {
            if m[(2, 2)] > 0.0 {
                0.0
            } else {
                PI
            }
        } else {
            beta
        };
        Self {
            alpha: wrap_angle(alpha),
            beta,
            gamma: wrap_angle(gamma),
            matrix: m,
        }
    }

    /// Rotation by `angle` about the z axis (the north-south axis).
    pub fn about_z(angle: f64) -> Self {
        Self::from_euler(angle, 0.0, 0.0)
    }

    /// Rotation by `angle` about the y axis.
    pub fn about_y(angle: f64) -> Self {
        Self::from_euler(0.0, angle, 0.0)
    }

    /// Right-handed rotation by `angle` about `axis` (need not be normalized).
    pub fn about_axis(axis: Vector3<f64>, angle: f64) -> Self {
        let u = axis.normalize();
        let (s, c) = angle.sin_cos();
        let k = Matrix3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0);
        let m = Matrix3::identity() + k * s + k * k * (1.0 - c);
        Self::from_matrix(m)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn euler(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, self.gamma)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self::from_matrix(self.matrix.transpose())
    }

    /// Group product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Rotation) -> Self {
        // exact identity keeps the other factor bit-for-bit
        if self.matrix == Matrix3::identity() {
            return *other;
        }
        if other.matrix == Matrix3::identity() {
            return *self;
        }
        Self::from_matrix(self.matrix * other.matrix)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v
    }

    pub fn act(&self, x: &SpherePoint) -> SpherePoint {
        SpherePoint::from_vector(&(self.matrix * x.vector()))
    }

    /// Largest entry of `|AᵀB − I|`; zero when the rotations coincide.
    pub fn distance_max(&self, other: &Rotation) -> f64 {
        (self.matrix.transpose() * other.matrix - Matrix3::identity()).amax()
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Rotation> for &'a Rotation {
    type Output = Rotation;

    fn mul(self, rhs: &Rotation) -> Rotation {
        self.compose(rhs)
    }
}

/// An element of the isotropy group K of the north pole: a rotation by
/// `gamma` about the z axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KElement {
    gamma: f64,
}

impl KElement {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma: wrap_angle(gamma),
        }
    }

    pub fn identity() -> Self {
        Self { gamma: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn compose(&self, other: &KElement) -> Self {
        Self::new(self.gamma + other.gamma)
    }

    pub fn inverse(&self) -> Self {
        Self::new(-self.gamma)
    }

    pub fn to_rotation(&self) -> Rotation {
        Rotation::about_z(self.gamma)
    }
}

/// A point of the unit sphere in colatitude/longitude coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
    vector: Vector3<f64>,
}

impl SpherePoint {
    /// `theta` is clamped to `[0, π]`, `phi` wrapped to `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let phi = wrap_angle(phi);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            theta,
            phi,
            vector: Vector3::new(st * cp, st * sp, ct),
        }
    }

    /// Normalizes `v` and reads off spherical coordinates.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let u = v.normalize();
        let theta = u.x.hypot(u.y).atan2(u.z);
        let phi = wrap_angle(u.y.atan2(u.x));
        Self {
            theta,
            phi,
            vector: u,
        }
    }

    pub fn north_pole() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn south_pole() -> Self {
        Self::new(PI, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.vector
    }

    /// Geodesic distance on the unit sphere.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        self.vector
            .cross(&other.vector)
            .norm()
            .atan2(self.vector.dot(&other.vector))
    }

    /// True when the point is within `margin` of either pole.
    pub fn near_pole(&self, margin: f64) -> bool {
        self.theta < margin || PI - self.theta < margin
    }
}

pub fn compose(r1: &Rotation, r2: &Rotation) -> Rotation {
    r1.compose(r2)
}

pub fn act(r: &Rotation, x: &SpherePoint) -> SpherePoint {
    r.act(x)
}

/// The canonical representative `g_x` with `g_x·x₀ = x` and third Euler angle
/// zero. The north pole maps to the identity, the south pole to `Ry(π)`.
pub fn section(x: &SpherePoint) -> Rotation {
    if x.theta == 0.0 {
        Rotation::identity()
    } else if x.theta == PI {
        Rotation::from_euler(0.0, PI, 0.0)
    } else {
        Rotation::from_euler(x.phi, x.theta, 0.0)
    }
}

/// The character `χ_s(k) = exp(i·s·γ(k))`.
pub fn character(s: i32, k: &KElement) -> Complex64 {
    Complex64::from_polar(1.0, f64::from(s) * k.gamma)
}

/// The K-valued chart-change factor
/// `k = g_{r2⁻¹x}⁻¹ · r2⁻¹ · r1 · g_{r1⁻¹x}`.
pub fn k_factor(r2: &Rotation, r1: &Rotation, x: &SpherePoint) -> Result<KElement> {
    let y1 = r1.inverse().act(x);
    let y2 = r2.inverse().act(x);
    if y1.near_pole(POLE_MARGIN) || y2.near_pole(POLE_MARGIN) {
        return Err(Error::ChartDomain);
    }
    let m = section(&y2).matrix().transpose()
        * r2.matrix().transpose()
        * r1.matrix()
        * section(&y1).matrix();
    Ok(KElement::new(m[(1, 0)].atan2(m[(0, 0)])))
}

/// The full product matrix behind [`k_factor`], without projecting onto K.
/// Exposed so callers can confirm the product really lies in K.
pub fn k_factor_matrix(r2: &Rotation, r1: &Rotation, x: &SpherePoint) -> Matrix3<f64> {
    let y1 = r1.inverse().act(x);
    let y2 = r2.inverse().act(x);
    section(&y2).matrix().transpose() * r2.matrix().transpose() * r1.matrix() * section(&y1).matrix()
}

/// Haar-uniform random rotation.
pub fn random_rotation<R: rand::Rng + ?Sized>(rng: &mut R) -> Rotation {
    let alpha = rng.random::<f64>() * TAU;
    let beta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    let gamma = rng.random::<f64>() * TAU;
    Rotation::from_euler(alpha, beta, gamma)
}

/// Uniform random point on the sphere.
pub fn random_point<R: rand::Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    SpherePoint::new(theta, rng.random::<f64>() * TAU)
}
