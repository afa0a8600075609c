//! Band-limited spectra of bi-s-associated functions on SO(3).
//!
//! A [`SpinSpectrum`] `α` stands for `f = Σ_ℓ √(2ℓ+1)·α_ℓ·D^ℓ_{s,s}`; a
//! [`CovarianceSpectrum`] `c` stands for `φ = Σ_ℓ c_ℓ·D^ℓ_{-s,-s}`. With these
//! conventions `φ(g) = (f ∗ f̆)(g⁻¹)` holds exactly when `c_ℓ = |α_ℓ|²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harmonics::legendre::legendre_integral01;
use crate::harmonics::quadrature::QuadratureRule;
use crate::harmonics::wigner::wigner_d_series;
use crate::so3::{random_rotation, Rotation};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn lowest(spin: i32) -> usize {
    spin.unsigned_abs() as usize
}

fn check_len(spin: i32, band_limit: usize, len: usize) -> Result<()> {
    if band_limit < lowest(spin) {
        return Err(Error::Index {
            ell: band_limit as i64,
            m: 0,
            s: i64::from(spin),
        });
    }
    let want = band_limit - lowest(spin) + 1;
    if len != want {
        return Err(Error::ShapeMismatch(format!(
            "spin {spin}, band limit {band_limit} needs {want} coefficients, got {len}"
        )));
    }
    Ok(())
}

/// `Σ_ℓ w_ℓ · D^ℓ_{m,m}(g)` over `ℓ = |m|..`, with `w` indexed from `|m|`.
fn diagonal_sum(m: i32, weights: &[Complex64], g: &Rotation) -> Complex64 {
    if weights.is_empty() {
        return ZERO;
    }
    let lo = lowest(m);
    let top = lo + weights.len() - 1;
    let d = wigner_d_series(m, m, top, g.beta());
    let phase = Complex64::from_polar(1.0, f64::from(m) * (g.alpha() + g.gamma()));
    let sum: Complex64 = weights.iter().zip(&d[lo..]).map(|(w, &d)| w * d).sum();
    phase * sum
}

/// Coefficients `α_ℓ`, `ℓ = |s|..=L`, of a bi-s-associated function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSpectrum {
    spin: i32,
    band_limit: usize,
    alpha: Vec<Complex64>,
}

impl SpinSpectrum {
    /// `alpha[i]` is the coefficient at `ℓ = |s| + i`.
    pub fn new(spin: i32, band_limit: usize, alpha: Vec<Complex64>) -> Result<Self> {
        check_len(spin, band_limit, alpha.len())?;
        Ok(Self {
            spin,
            band_limit,
            alpha,
        })
    }

    pub fn zeros(spin: i32, band_limit: usize) -> Result<Self> {
        let n = band_limit.checked_sub(lowest(spin)).map_or(0, |k| k + 1);
        Self::new(spin, band_limit, vec![ZERO; n])
    }

    /// Scalar (`s = 0`) spectrum from real coefficients starting at `ℓ = 0`.
    pub fn scalar(alpha: &[f64]) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::ShapeMismatch("empty scalar spectrum".into()));
        }
        Self::new(0, alpha.len() - 1, alpha.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// A spectrum with a single nonzero coefficient.
    pub fn single_mode(spin: i32, band_limit: usize, ell: usize, value: Complex64) -> Result<Self> {
        let mut f = Self::zeros(spin, band_limit)?;
        if ell < lowest(spin) || ell > band_limit {
            return Err(Error::Index {
                ell: ell as i64,
                m: i64::from(spin),
                s: i64::from(spin),
            });
        }
        f.alpha[ell - lowest(spin)] = value;
        Ok(f)
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn lowest_degree(&self) -> usize {
        lowest(self.spin)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.alpha
    }

    /// `α_ℓ`, zero outside `|s|..=L`.
    pub fn coefficient(&self, ell: usize) -> Complex64 {
        if ell < self.lowest_degree() || ell > self.band_limit {
            ZERO
        } else {
            self.alpha[ell - self.lowest_degree()]
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = self.lowest_degree();
        self.alpha.iter().enumerate().map(move |(i, &a)| (lo + i, a))
    }

    /// `‖f‖² = Σ |α_ℓ|²` on SO(3) with unit mass.
    pub fn norm_sq(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.alpha.iter().all(|a| a.im == 0.0)
    }

    pub fn truncated(&self, band_limit: usize) -> Result<Self> {
        let lo = self.lowest_degree();
        let alpha = (lo..=band_limit).map(|l| self.coefficient(l)).collect();
        Self::new(self.spin, band_limit, alpha)
    }

    pub fn eval(&self, g: &Rotation) -> Complex64 {
        let w: Vec<Complex64> = self
            .degrees()
            .map(|(l, a)| a * ((2 * l + 1) as f64).sqrt())
            .collect();
        diagonal_sum(self.spin, &w, g)
    }
}

/// Coefficients `c_ℓ` of `φ = Σ c_ℓ D^ℓ_{-s,-s}`, `ℓ = |s|..=L`. Negative
/// entries are representable so that diagnostics can reject them.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSpectrum {
    spin: i32,
    band_limit: usize,
    c: Vec<f64>,
}

impl CovarianceSpectrum {
    pub fn new(spin: i32, band_limit: usize, c: Vec<f64>) -> Result<Self> {
        check_len(spin, band_limit, c.len())?;
        Ok(Self { spin, band_limit, c })
    }

    pub fn scalar(c: &[f64]) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::ShapeMismatch("empty scalar spectrum".into()));
        }
        Self::new(0, c.len() - 1, c.to_vec())
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn lowest_degree(&self) -> usize {
        lowest(self.spin)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn coefficient(&self, ell: usize) -> f64 {
        if ell < self.lowest_degree() || ell > self.band_limit {
            0.0
        } else {
            self.c[ell - self.lowest_degree()]
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.lowest_degree();
        self.c.iter().enumerate().map(move |(i, &c)| (lo + i, c))
    }

    /// `φ(e) = Σ c_ℓ`, the pointwise variance of the associated field.
    pub fn total_variance(&self) -> f64 {
        self.c.iter().sum()
    }

    /// The band-limited stand-in for uniform convergence: `Σ √(2ℓ+1)·|c_ℓ|`.
    pub fn summability(&self) -> f64 {
        self.degrees().map(|(l, c)| ((2 * l + 1) as f64).sqrt() * c.abs()).sum()
    }

    /// Keep only degree `ell`; other coefficients are zeroed.
    pub fn component(&self, ell: usize) -> Self {
        let lo = self.lowest_degree();
        let c = self
            .degrees()
            .map(|(l, c)| if l == ell { c } else { 0.0 })
            .collect::<Vec<_>>();
        debug_assert_eq!(c.len(), self.band_limit + 1 - lo);
        Self {
            spin: self.spin,
            band_limit: self.band_limit,
            c,
        }
    }

    pub fn eval(&self, g: &Rotation) -> Complex64 {
        let w: Vec<Complex64> = self.c.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        diagonal_sum(-self.spin, &w, g)
    }
}

/// `f(g) = Σ √(2ℓ+1)·α_ℓ·D^ℓ_{s,s}(g)`.
pub fn synthesize_fn(sigma: &SpinSpectrum, g: &Rotation) -> Complex64 {
    sigma.eval(g)
}

/// `α_ℓ = √(2ℓ+1)·∫ f·conj(D^ℓ_{s,s}) dg` from samples at the rule's nodes.
pub fn analyze(samples: &[Complex64], rule: &QuadratureRule<Rotation>, spin: i32, band_limit: usize) -> Result<SpinSpectrum> {
    if rule.band_limit() < band_limit {
        return Err(Error::BandLimit {
            rule: rule.band_limit(),
            requested: band_limit,
        });
    }
    if samples.len() != rule.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} samples for a rule with {} nodes",
            samples.len(),
            rule.len()
        )));
    }
    let lo = lowest(spin);
    if band_limit < lo {
        return SpinSpectrum::zeros(spin, band_limit);
    }
    let mut acc = vec![ZERO; band_limit + 1 - lo];
    for ((g, w), &v) in rule.iter().zip(samples) {
        let d = wigner_d_series(spin, spin, band_limit, g.beta());
        let phase = Complex64::from_polar(w, -f64::from(spin) * (g.alpha() + g.gamma()));
        let v = v * phase;
        for (a, &d) in acc.iter_mut().zip(&d[lo..]) {
            *a += v * d;
        }
    }
    for (i, a) in acc.iter_mut().enumerate() {
        *a *= ((2 * (lo + i) + 1) as f64).sqrt();
    }
    SpinSpectrum::new(spin, band_limit, acc)
}

/// Analysis of a function given as a closure.
pub fn analyze_fn<F: FnMut(&Rotation) -> Complex64>(
    f: F,
    rule: &QuadratureRule<Rotation>,
    spin: i32,
    band_limit: usize,
) -> Result<SpinSpectrum> {
    let samples: Vec<Complex64> = rule.nodes().iter().map(f).collect();
    analyze(&samples, rule, spin, band_limit)
}

/// Spectrum of `f ∗ g`, `(f∗g)(x) = ∫ f(h)·g(h⁻¹x) dh`; the band limit is the
/// smaller of the two.
pub fn convolve(f: &SpinSpectrum, g: &SpinSpectrum) -> Result<SpinSpectrum> {
    if f.spin != g.spin {
        return Err(Error::SpinMismatch(f.spin, g.spin));
    }
    let band = f.band_limit.min(g.band_limit);
    let alpha = (f.lowest_degree()..=band)
        .map(|l| f.coefficient(l) * g.coefficient(l) / ((2 * l + 1) as f64).sqrt())
        .collect();
    SpinSpectrum::new(f.spin, band, alpha)
}

/// Spectrum of `f̆(g) = conj(f(g⁻¹))`. `D^ℓ_{s,s}(g⁻¹) = conj(D^ℓ_{s,s}(g))`, so
/// this is plain conjugation and the spin is unchanged.
pub fn involution(f: &SpinSpectrum) -> SpinSpectrum {
    SpinSpectrum {
        spin: f.spin,
        band_limit: f.band_limit,
        alpha: f.alpha.iter().map(|a| a.conj()).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Choice of root `α_ℓ = ε_ℓ·√c_ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub enum SignPolicy {
    AllPlus,
    /// Alternate along the degrees of the given parity: `ε_ℓ = (-1)^⌊ℓ/2⌋` there,
    /// `+1` on the others. `Alternating(Odd)` on the Lévy spectrum gives the
    /// half-sphere indicator.
    Alternating(Parity),
    /// Unit-modulus phases indexed from `ℓ = |s|`.
    Explicit(Vec<Complex64>),
}

impl SignPolicy {
    fn sign(&self, ell: usize, index: usize) -> Complex64 {
        match self {
            SignPolicy::AllPlus => Complex64::new(1.0, 0.0),
            SignPolicy::Alternating(p) => {
                let matches = match p {
                    Parity::Even => ell % 2 == 0,
                    Parity::Odd => ell % 2 == 1,
                };
                if matches && (ell / 2) % 2 == 1 {
                    Complex64::new(-1.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }
            SignPolicy::Explicit(v) => v[index],
        }
    }
}

const NEGATIVE_SLACK: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-12;

/// A root `f` with `φ(g) = (f ∗ f̆)(g⁻¹)`.
pub fn sqrt_spectrum(phi: &CovarianceSpectrum, signs: &SignPolicy) -> Result<SpinSpectrum> {
    if let SignPolicy::Explicit(v) = signs {
        if v.len() != phi.c.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} explicit signs for {} coefficients",
                v.len(),
                phi.c.len()
            )));
        }
        if let Some(z) = v.iter().find(|z| (z.norm() - 1.0).abs() > UNIT_TOL) {
            return Err(Error::Domain {
                value: z.norm(),
                domain: "unit circle",
            });
        }
    }
    let mut alpha = Vec::with_capacity(phi.c.len());
    for (i, (ell, c)) in phi.degrees().enumerate() {
        if c < -NEGATIVE_SLACK {
            return Err(Error::NegativeCoefficient { ell, value: c });
        }
        alpha.push(signs.sign(ell, i) * c.max(0.0).sqrt());
    }
    SpinSpectrum::new(phi.spin, phi.band_limit, alpha)
}

/// `c_ℓ = |α_ℓ|²`.
pub fn phi_from_f(f: &SpinSpectrum) -> CovarianceSpectrum {
    CovarianceSpectrum {
        spin: f.spin,
        band_limit: f.band_limit,
        c: f.alpha.iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// The Lévy coefficient in product form: `π·[(2m-1)!!/(2m+2)!!]²` for
/// `ℓ = 2m+1`, zero for even `ℓ`. Equals `∫₋₁¹ arcsin(t)·P_ℓ(t) dt`.
pub fn levy_c(ell: usize) -> f64 {
    if ell % 2 == 0 {
        return 0.0;
    }
    let m = (ell - 1) / 2;
    let num: f64 = (1..=m).map(|k| ((2 * k - 1) as f64).ln()).sum();
    let den: f64 = (1..=m + 1).map(|k| ((2 * k) as f64).ln()).sum();
    PI * (2.0 * (num - den)).exp()
}

/// Covariance spectrum of `φ(x) = π/2 − d(x, x₀)/2` against `D^ℓ_{0,0}`:
/// `c₀ = π/4` and `(2ℓ+1)·levy_c(ℓ)/4` for `ℓ ≥ 1`.
pub fn levy_phi_coefficients(band_limit: usize) -> CovarianceSpectrum {
    let c = (0..=band_limit)
        .map(|l| {
            if l == 0 {
                PI / 4.0
            } else {
                (2 * l + 1) as f64 * levy_c(l) / 4.0
            }
        })
        .collect();
    CovarianceSpectrum {
        spin: 0,
        band_limit,
        c,
    }
}

/// Root spectrum of `f = √π·1_H`, `H` the northern hemisphere:
/// `α_ℓ = (√π/2)·√(2ℓ+1)·∫₀¹P_ℓ`.
pub fn halfsphere_f_coefficients(band_limit: usize) -> SpinSpectrum {
    let alpha = (0..=band_limit)
        .map(|l| Complex64::new(0.5 * PI.sqrt() * ((2 * l + 1) as f64).sqrt() * legendre_integral01(l), 0.0))
        .collect();
    SpinSpectrum {
        spin: 0,
        band_limit,
        alpha,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositiveDefiniteReport {
    pub negative_coefficients: Vec<(usize, f64)>,
    pub gram_size: usize,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

impl PositiveDefiniteReport {
    pub fn coefficients_ok(&self) -> bool {
        self.negative_coefficients.is_empty()
    }

    pub fn gram_ok(&self) -> bool {
        self.min_eigenvalue >= -self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.coefficients_ok() && self.gram_ok()
    }
}

pub const GRAM_TOLERANCE: f64 = 1e-8;

/// Coefficient test plus the Gram test on `n` random rotations:
/// `G_ij = φ(g_i⁻¹ g_j)` must have no eigenvalue below `-1e-8`.
pub fn check_positive_definite(phi: &CovarianceSpectrum, n: usize, seed: u64) -> PositiveDefiniteReport {
    let negative_coefficients = phi.degrees().filter(|&(_, c)| c < 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs: Vec<Rotation> = (0..n).map(|_| random_rotation(&mut rng)).collect();
    let mut gram = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let gi_inv = gs[i].inverse();
        for j in i..n {
            let v = phi.eval(&gi_inv.compose(&gs[j]));
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
        gram[(i, i)].im = 0.0;
    }
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    };
    PositiveDefiniteReport {
        negative_coefficients,
        gram_size: n,
        min_eigenvalue,
        tolerance: GRAM_TOLERANCE,
    }
}
