//! Gaussian synthesis of scalar fields and spin-s random sections.
//!
//! A draw holds white-noise coefficients `a_{ℓ,m}`; the pullback field is
//! `X_g = Σ_ℓ α_ℓ Σ_m a_{ℓ,m} D^ℓ_{m,-s}(g)`, a type-s function on SO(3).
//! Values on the sphere are chart values at the canonical representative
//! `section(x)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::harmonics::wigner::wigner_column;
use crate::so3::{character, section, KElement, Rotation, SpherePoint};
use crate::spectral::{halfsphere_f_coefficients, SpinSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reality {
    ComplexGaussian,
    /// `a_{ℓ,-m} = (-1)^m conj(a_{ℓ,m})`, `a_{ℓ,0}` real; spin 0 only.
    RealConstrained,
}

fn lowest(spin: i32) -> usize {
    spin.unsigned_abs() as usize
}

/// Position of `(ℓ, m)` in the flat coefficient layout starting at `ℓ = |s|`.
fn flat_index(spin: i32, ell: usize, m: i32) -> usize {
    let lo = lowest(spin);
    ell * ell - lo * lo + (m + ell as i32) as usize
}

fn flat_len(spin: i32, band_limit: usize) -> usize {
    let lo = lowest(spin);
    (band_limit + 1) * (band_limit + 1) - lo * lo
}

/// One realization of the white-noise coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientDraw {
    spin: i32,
    band_limit: usize,
    reality: Reality,
    seed: u64,
    a: Vec<Complex64>,
}

impl CoefficientDraw {
    /// Build from explicit coefficients in `(ℓ, m)` order, `ℓ = |s|..=L`.
    pub fn from_coefficients(
        spin: i32,
        band_limit: usize,
        reality: Reality,
        seed: u64,
        a: Vec<Complex64>,
    ) -> Result<Self> {
        if band_limit < lowest(spin) {
            return Err(Error::Index {
                ell: band_limit as i64,
                m: 0,
                s: i64::from(spin),
            });
        }
        if a.len() != flat_len(spin, band_limit) {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for spin {spin}, band limit {band_limit}",
                a.len()
            )));
        }
        if reality == Reality::RealConstrained && spin != 0 {
            return Err(Error::Reality);
        }
        Ok(Self {
            spin,
            band_limit,
            reality,
            seed,
            a,
        })
    }

    pub fn zeros(spin: i32, band_limit: usize) -> Result<Self> {
        let n = if band_limit < lowest(spin) { 0 } else { flat_len(spin, band_limit) };
        Self::from_coefficients(spin, band_limit, Reality::ComplexGaussian, 0, vec![ZERO; n])
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `a_{ℓ,m}`; panics outside the index range.
    pub fn get(&self, ell: usize, m: i32) -> Complex64 {
        assert!(ell >= lowest(self.spin) && ell <= self.band_limit && m.unsigned_abs() as usize <= ell);
        self.a[flat_index(self.spin, ell, m)]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.a
    }

    /// Multiply every `a_{ℓ,m}` by a weight in the same flat layout.
    pub fn scale(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.a.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} coefficients",
                weights.len(),
                self.a.len()
            )));
        }
        for (a, w) in self.a.iter_mut().zip(weights) {
            *a *= w;
        }
        Ok(())
    }
}

/// The coefficients `a_{ℓ,-ℓ..=ℓ}` of one degree. The generator is ChaCha8
/// keyed by `seed` on stream `ℓ`; within the stream, `m` runs in a fixed
/// order, so every `a_{ℓ,m}` is a pure function of `(seed, ℓ, m)` and degrees
/// can be produced in any order.
pub fn coefficient_block(seed: u64, ell: usize, reality: Reality) -> Vec<Complex64> {
    let mut out = vec![ZERO; 2 * ell + 1];
    fill_block(seed, ell, reality, &mut out);
    out
}

fn fill_block(seed: u64, ell: usize, reality: Reality, out: &mut [Complex64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ell as u64);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let l = ell as i32;
    match reality {
        Reality::ComplexGaussian => {
            for z in out.iter_mut() {
                *z = Complex64::new(normal(), normal()) * FRAC_1_SQRT_2;
            }
        }
        Reality::RealConstrained => {
            out[ell] = Complex64::new(normal(), 0.0);
            for m in 1..=l {
                let z = Complex64::new(normal(), normal()) * FRAC_1_SQRT_2;
                out[(l + m) as usize] = z;
                out[(l - m) as usize] = if m % 2 == 0 { z.conj() } else { -z.conj() };
            }
        }
    }
}

/// White-noise coefficients for the field of `f`.
pub fn draw_coefficients(f: &SpinSpectrum, seed: u64, reality: Reality) -> Result<CoefficientDraw> {
    draw_raw(f.spin(), f.band_limit(), seed, reality, f.is_real())
}

fn draw_raw(spin: i32, band_limit: usize, seed: u64, reality: Reality, real_root: bool) -> Result<CoefficientDraw> {
    if reality == Reality::RealConstrained && (spin != 0 || !real_root) {
        return Err(Error::Reality);
    }
    let mut a = vec![ZERO; flat_len(spin, band_limit)];
    for ell in lowest(spin)..=band_limit {
        let start = flat_index(spin, ell, -(ell as i32));
        fill_block(seed, ell, reality, &mut a[start..start + 2 * ell + 1]);
    }
    CoefficientDraw::from_coefficients(spin, band_limit, reality, seed, a)
}

fn check_shape(f: &SpinSpectrum, draw: &CoefficientDraw) -> Result<()> {
    if f.spin() != draw.spin || f.band_limit() != draw.band_limit {
        return Err(Error::ShapeMismatch(format!(
            "spectrum (s={}, L={}) vs draw (s={}, L={})",
            f.spin(),
            f.band_limit(),
            draw.spin,
            draw.band_limit
        )));
    }
    Ok(())
}

/// The weights `α_ℓ·D^ℓ_{m,-s}(g)` in the flat draw layout, so that
/// `X_g = Σ a·w`.
#[derive(Clone, Debug)]
pub struct Probe {
    weights: Vec<Complex64>,
}

impl Probe {
    pub fn new(f: &SpinSpectrum, g: &Rotation) -> Self {
        let s = f.spin();
        let cols = wigner_column(-s, f.band_limit(), g);
        let mut weights = Vec::with_capacity(flat_len(s, f.band_limit()));
        for (ell, alpha) in f.degrees() {
            weights.extend(cols[ell].iter().map(|d| alpha * d));
        }
        Self { weights }
    }

    pub fn eval(&self, a: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(a).map(|(w, a)| w * a).sum()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }
}

/// `X_g = Σ_ℓ α_ℓ Σ_m a_{ℓ,m} D^ℓ_{m,-s}(g)`.
pub fn synthesize_pullback(f: &SpinSpectrum, draw: &CoefficientDraw, g: &Rotation) -> Result<Complex64> {
    check_shape(f, draw)?;
    Ok(Probe::new(f, g).eval(&draw.a))
}

/// Sampling nodes for a realization.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// `θ_i = π(i+½)/n_θ`, `φ_j = 2πj/n_φ`, row-major in `θ`.
    Equiangular {
        n_theta: usize,
        n_phi: usize,
        points: Vec<SpherePoint>,
    },
    Points(Vec<SpherePoint>),
    /// Pullback grid on SO(3).
    Rotations(Vec<Rotation>),
}

impl Grid {
    pub fn equiangular(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::ShapeMismatch(format!("grid {n_theta}x{n_phi}")));
        }
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = PI * (i as f64 + 0.5) / n_theta as f64;
            for j in 0..n_phi {
                points.push(SpherePoint::new(theta, TAU * j as f64 / n_phi as f64));
            }
        }
        Ok(Grid::Equiangular {
            n_theta,
            n_phi,
            points,
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Equiangular { points, .. } | Grid::Points(points) => points.len(),
            Grid::Rotations(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> String {
        match self {
            Grid::Equiangular { n_theta, n_phi, .. } => format!("equiangular:{n_theta}x{n_phi}"),
            Grid::Points(_) => "points".into(),
            Grid::Rotations(_) => "rotations".into(),
        }
    }

    pub fn points(&self) -> Option<&[SpherePoint]> {
        match self {
            Grid::Equiangular { points, .. } | Grid::Points(points) => Some(points),
            Grid::Rotations(_) => None,
        }
    }

    /// Representatives used for evaluation: `section(x)` on sphere grids.
    pub fn rotations(&self) -> Vec<Rotation> {
        match self {
            Grid::Equiangular { points, .. } | Grid::Points(points) => points.iter().map(section).collect(),
            Grid::Rotations(r) => r.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub spectrum_id: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldRealization {
    pub spin: i32,
    pub band_limit: usize,
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
}

impl FieldRealization {
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// Chart values `X_{section(x)}` on a sphere grid, or pullback values on a
/// rotation grid.
pub fn synthesize_field(f: &SpinSpectrum, draw: &CoefficientDraw, grid: Grid) -> Result<FieldRealization> {
    check_shape(f, draw)?;
    let values = grid
        .rotations()
        .iter()
        .map(|g| Probe::new(f, g).eval(&draw.a))
        .collect();
    Ok(FieldRealization {
        spin: f.spin(),
        band_limit: f.band_limit(),
        grid,
        values,
        provenance: Provenance {
            spectrum_id: crate::io::spectrum_hash_root(f),
            seed: draw.seed,
        },
    })
}

/// Lévy's spherical Brownian field `W_x = T_x − T_{x₀}` built from the
/// half-sphere root with real-constrained draws.
pub fn levy_field(band_limit: usize, seed: u64, grid: Grid) -> Result<FieldRealization> {
    if band_limit == 0 {
        return Err(Error::Domain {
            value: 0.0,
            domain: "band limit >= 1",
        });
    }
    let f = halfsphere_f_coefficients(band_limit);
    let draw = draw_coefficients(&f, seed, Reality::RealConstrained)?;
    let pole = Probe::new(&f, &Rotation::identity()).eval(&draw.a);
    let mut field = synthesize_field(&f, &draw, grid)?;
    for v in &mut field.values {
        *v -= pole;
    }
    Ok(field)
}

fn representative_offset(x: &SpherePoint, g: &Rotation) -> Result<KElement> {
    let k = section(x).inverse().compose(g);
    if k.beta() > 1e-9 {
        return Err(Error::ShapeMismatch(format!(
            "representative does not map the north pole to (θ={}, φ={})",
            x.theta(),
            x.phi()
        )));
    }
    Ok(KElement::new(k.alpha() + k.gamma()))
}

/// Pullback values at representatives `g_i = section(x_i)·k_i` from chart
/// values at `section(x_i)`: `X_{g k} = χ_s(k⁻¹)·X_g`.
pub fn section_to_pullback(
    spin: i32,
    points: &[SpherePoint],
    chart_values: &[Complex64],
    representatives: &[Rotation],
) -> Result<Vec<Complex64>> {
    if points.len() != chart_values.len() || points.len() != representatives.len() {
        return Err(Error::ShapeMismatch("points, values and representatives differ in length".into()));
    }
    points
        .iter()
        .zip(chart_values)
        .zip(representatives)
        .map(|((x, v), g)| Ok(v * character(spin, &representative_offset(x, g)?.inverse())))
        .collect()
}

/// Inverse of [`section_to_pullback`].
pub fn pullback_to_section(
    spin: i32,
    points: &[SpherePoint],
    pullback_values: &[Complex64],
    representatives: &[Rotation],
) -> Result<Vec<Complex64>> {
    if points.len() != pullback_values.len() || points.len() != representatives.len() {
        return Err(Error::ShapeMismatch("points, values and representatives differ in length".into()));
    }
    points
        .iter()
        .zip(pullback_values)
        .zip(representatives)
        .map(|((x, v), g)| Ok(v * character(spin, &representative_offset(x, g)?)))
        .collect()
}

/// Seed of replicate `i` in a Monte Carlo run with base seed `base`.
pub fn replicate_seed(base: u64, i: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio stride
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A Gaussian field law: root spectrum, reality convention, and optional
/// per-`(ℓ, m)` amplitude weights (non-uniform weights break isotropy).
#[derive(Clone, Debug)]
pub struct GaussianModel {
    spectrum: SpinSpectrum,
    reality: Reality,
    mode_weights: Option<Vec<f64>>,
}

impl GaussianModel {
    pub fn new(spectrum: SpinSpectrum, reality: Reality) -> Result<Self> {
        if reality == Reality::RealConstrained && (spectrum.spin() != 0 || !spectrum.is_real()) {
            return Err(Error::Reality);
        }
        Ok(Self {
            spectrum,
            reality,
            mode_weights: None,
        })
    }

    /// `weight(ℓ, m)` multiplies `a_{ℓ,m}`.
    pub fn with_mode_weights<W: Fn(usize, i32) -> f64>(mut self, weight: W) -> Self {
        let s = self.spectrum.spin();
        let mut w = Vec::with_capacity(flat_len(s, self.spectrum.band_limit()));
        for ell in lowest(s)..=self.spectrum.band_limit() {
            for m in -(ell as i32)..=ell as i32 {
                w.push(weight(ell, m));
            }
        }
        self.mode_weights = Some(w);
        self
    }

    pub fn spectrum(&self) -> &SpinSpectrum {
        &self.spectrum
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn is_isotropic(&self) -> bool {
        self.mode_weights.is_none()
    }

    pub fn draw(&self, seed: u64) -> CoefficientDraw {
        let s = &self.spectrum;
        let mut d = draw_raw(s.spin(), s.band_limit(), seed, self.reality, s.is_real())
            .expect("reality checked at construction");
        if let Some(w) = &self.mode_weights {
            d.scale(w).expect("weights built for this layout");
        }
        d
    }

    pub fn probe(&self, g: &Rotation) -> Probe {
        Probe::new(&self.spectrum, g)
    }

    /// Values at `gs` for replicate `i` of a run with base seed `base`.
    pub fn sample_at(&self, probes: &[Probe], base: u64, i: u64, out: &mut [Complex64]) {
        let d = self.draw(replicate_seed(base, i));
        for (o, p) in out.iter_mut().zip(probes) {
            *o = p.eval(&d.a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::wigner::wigner_entry;
    use crate::so3::{random_point, random_rotation};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn determinism_and_layout() {
        let f = SpinSpectrum::scalar(&[1.0, 0.5, 0.25, 0.1]).unwrap();
        let a = draw_coefficients(&f, 42, Reality::ComplexGaussian).unwrap();
        let b = draw_coefficients(&f, 42, Reality::ComplexGaussian).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, draw_coefficients(&f, 43, Reality::ComplexGaussian).unwrap());
        // order-independence: a block computed alone equals its slice of the draw
        let block = coefficient_block(42, 2, Reality::ComplexGaussian);
        for m in -2..=2 {
            assert_eq!(a.get(2, m), block[(m + 2) as usize]);
        }
    }

    #[test]
    fn real_constraint() {
        let f = SpinSpectrum::scalar(&[1.0, 0.5, 0.25, 0.1]).unwrap();
        let d = draw_coefficients(&f, 7, Reality::RealConstrained).unwrap();
        assert_eq!(d.get(3, -2), d.get(3, 2).conj());
        assert_eq!(d.get(3, -1), -d.get(3, 1).conj());
        assert_eq!(d.get(2, 0).im, 0.0);
        let spin = SpinSpectrum::zeros(1, 3).unwrap();
        assert!(matches!(draw_coefficients(&spin, 1, Reality::RealConstrained), Err(Error::Reality)));
        let complex = SpinSpectrum::new(0, 1, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(matches!(draw_coefficients(&complex, 1, Reality::RealConstrained), Err(Error::Reality)));
    }

    #[test]
    fn pullback_single_mode_and_zero() {
        let f = SpinSpectrum::single_mode(-1, 3, 2, c(1.0, 0.0)).unwrap();
        let g = Rotation::from_euler(1.0, 0.7, 2.0);
        let mut a = vec![ZERO; flat_len(-1, 3)];
        a[flat_index(-1, 2, 1)] = c(1.0, 0.0);
        let draw = CoefficientDraw::from_coefficients(-1, 3, Reality::ComplexGaussian, 0, a).unwrap();
        let x = synthesize_pullback(&f, &draw, &g).unwrap();
        assert!((x - wigner_entry(2, 1, 1, &g)).norm() < 1e-14);
        let zero = CoefficientDraw::zeros(-1, 3).unwrap();
        assert_eq!(synthesize_pullback(&f, &zero, &g).unwrap(), ZERO);
        let other = CoefficientDraw::zeros(-1, 4).unwrap();
        assert!(matches!(synthesize_pullback(&f, &other, &g), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn type_s_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = SpinSpectrum::new(2, 6, (0..5).map(|i| c(1.0 / (i + 1) as f64, 0.3)).collect()).unwrap();
        let d = draw_coefficients(&f, 3, Reality::ComplexGaussian).unwrap();
        for _ in 0..50 {
            let g = random_rotation(&mut rng);
            let k = KElement::new(rng.random::<f64>() * TAU);
            let lhs = synthesize_pullback(&f, &d, &g.compose(&k.to_rotation())).unwrap();
            let rhs = character(2, &k.inverse()) * synthesize_pullback(&f, &d, &g).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn real_fields_are_real_and_constant_mode() {
        let f = SpinSpectrum::scalar(&[0.8, 0.5, -0.3, 0.2, 0.1]).unwrap();
        let d = draw_coefficients(&f, 11, Reality::RealConstrained).unwrap();
        let field = synthesize_field(&f, &d, Grid::equiangular(8, 16).unwrap()).unwrap();
        assert!(field.max_imag() < 1e-10);
        assert_eq!(field.values.len(), 128);

        let one = SpinSpectrum::scalar(&[1.0]).unwrap();
        let d = draw_coefficients(&one, 5, Reality::ComplexGaussian).unwrap();
        let field = synthesize_field(&one, &d, Grid::equiangular(3, 4).unwrap()).unwrap();
        assert!(field.values.iter().all(|v| (v - d.get(0, 0)).norm() < 1e-15));
    }

    #[test]
    fn levy_pole_is_zero() {
        let grid = Grid::Points(vec![SpherePoint::north_pole(), SpherePoint::new(1.0, 2.0)]);
        let w = levy_field(20, 9, grid).unwrap();
        assert_eq!(w.values[0], ZERO);
        assert!(w.values[1].norm() > 0.0);
        assert!(w.max_imag() < 1e-10);
    }

    #[test]
    fn section_pullback_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = SpinSpectrum::new(2, 5, (0..4).map(|i| c(0.5, i as f64 * 0.1)).collect()).unwrap();
        let d = draw_coefficients(&f, 8, Reality::ComplexGaussian).unwrap();
        let pts: Vec<SpherePoint> = (0..20).map(|_| random_point(&mut rng)).collect();
        let field = synthesize_field(&f, &d, Grid::Points(pts.clone())).unwrap();
        let reps: Vec<Rotation> = pts
            .iter()
            .map(|x| section(x).compose(&Rotation::about_z(rng.random::<f64>() * TAU)))
            .collect();
        let pb = section_to_pullback(2, &pts, &field.values, &reps).unwrap();
        for (g, v) in reps.iter().zip(&pb) {
            assert!((synthesize_pullback(&f, &d, g).unwrap() - v).norm() < 1e-10);
        }
        let back = pullback_to_section(2, &pts, &pb, &reps).unwrap();
        for (a, b) in back.iter().zip(&field.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let bad = vec![Rotation::about_y(0.3); 20];
        assert!(section_to_pullback(2, &pts, &field.values, &bad).is_err());
        // spin 0 ignores the representative
        let v0 = section_to_pullback(0, &pts, &field.values, &reps).unwrap();
        assert_eq!(v0, field.values);
    }

    #[test]
    fn replicate_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| replicate_seed(1, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(replicate_seed(1, 0), replicate_seed(2, 0));
    }

    #[test]
    fn weighted_model_scales_modes() {
        let f = SpinSpectrum::scalar(&[1.0, 1.0]).unwrap();
        let m = GaussianModel::new(f.clone(), Reality::ComplexGaussian)
            .unwrap()
            .with_mode_weights(|_, m| if m == 1 { 3.0 } else { 1.0 });
        assert!(!m.is_isotropic());
        let d = m.draw(5);
        let plain = draw_coefficients(&f, 5, Reality::ComplexGaussian).unwrap();
        assert_eq!(d.get(1, 1), plain.get(1, 1) * 3.0);
        assert_eq!(d.get(1, -1), plain.get(1, -1));
    }
}
