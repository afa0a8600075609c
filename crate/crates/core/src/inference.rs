//! Monte Carlo estimators and k-sigma checks against spectral targets.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldsynth::{GaussianModel, Probe, Reality};
use crate::harmonics::quadrature::QuadratureRule;
use crate::harmonics::wigner::wigner_column;
use crate::io::fmt_f64;
use crate::so3::{section, Rotation, SpherePoint};
use crate::spectral::{halfsphere_f_coefficients, phi_from_f, CovarianceSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Replicates per accumulation block. Blocks are merged in index order, so
/// results do not depend on how blocks are scheduled.
pub const BLOCK: usize = 256;

/// Running mean and centered second moment of a vector of complex
/// statistics (Welford update, Chan merge).
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    n: u64,
    mean: Vec<Complex64>,
    m2: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Self {
            n: 0,
            mean: vec![ZERO; k],
            m2: vec![0.0; k],
        }
    }

    pub fn push(&mut self, x: &[Complex64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = x - *m;
            *m += d / n;
            *s += (d.conj() * (x - *m)).re;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * (nb / n);
            self.m2[i] += other.m2[i] + d.norm_sqr() * na * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, i: usize) -> Complex64 {
        self.mean[i]
    }

    /// Unbiased `E|x − mean|²`.
    pub fn variance(&self, i: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2[i] / (self.n - 1) as f64
        }
    }

    pub fn standard_error(&self, i: usize) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance(i) / self.n as f64).sqrt()
        }
    }
}

/// Accumulate `k` statistics over replicates `0..n`; `sample(i, out)` fills
/// the statistics of replicate `i`.
pub fn monte_carlo<F: FnMut(u64, &mut [Complex64])>(n: usize, k: usize, mut sample: F) -> Moments {
    let mut total = Moments::new(k);
    let mut buf = vec![ZERO; k];
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let mut block = Moments::new(k);
        for i in start..end {
            sample(i as u64, &mut buf);
            block.push(&buf);
        }
        total.merge(&block);
        start = end;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// `|estimate − target| ≤ k·σ`.
    Sigma(f64),
    /// `|estimate − target| ≤ tol·max(|target|, floor)`.
    Relative { tol: f64, floor: f64 },
}

impl Tolerance {
    fn admits(&self, err: f64, se: f64, target: Complex64) -> bool {
        match *self {
            Tolerance::Sigma(k) => err <= k * se,
            Tolerance::Relative { tol, floor } => err <= tol * target.norm().max(floor),
        }
    }

    fn describe(&self) -> String {
        match *self {
            Tolerance::Sigma(k) => format!("{k}sigma"),
            Tolerance::Relative { tol, floor } if floor > 0.0 => format!("rel{tol}(floor {floor})"),
            Tolerance::Relative { tol, .. } => format!("rel{tol}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub label: String,
    pub estimate: Complex64,
    pub standard_error: f64,
    pub target: Complex64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl ReportEntry {
    pub fn new(label: impl Into<String>, estimate: Complex64, standard_error: f64, target: Complex64, tolerance: Tolerance) -> Self {
        let pass = tolerance.admits((estimate - target).norm(), standard_error, target);
        Self {
            label: label.into(),
            estimate,
            standard_error,
            target,
            tolerance,
            pass,
        }
    }

    /// `|estimate − target| / σ`, infinite when σ is zero and they differ.
    pub fn z_score(&self) -> f64 {
        let err = (self.estimate - self.target).norm();
        if err == 0.0 {
            0.0
        } else {
            err / self.standard_error
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub title: String,
    pub n_samples: usize,
    pub entries: Vec<ReportEntry>,
    pub notes: Vec<String>,
}

impl EstimatorReport {
    pub fn new(title: impl Into<String>, n_samples: usize) -> Self {
        Self {
            title: title.into(),
            n_samples,
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.pass).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# report {:?} n={} entries={} failures={}",
            self.title,
            self.n_samples,
            self.entries.len(),
            self.failures()
        )
        .unwrap();
        for note in &self.notes {
            writeln!(out, "# note {note}").unwrap();
        }
        for e in &self.entries {
            writeln!(
                out,
                "{:?} estimate={},{} target={},{} se={} tolerance={} verdict={}",
                e.label,
                fmt_f64(e.estimate.re),
                fmt_f64(e.estimate.im),
                fmt_f64(e.target.re),
                fmt_f64(e.target.im),
                fmt_f64(e.standard_error),
                e.tolerance.describe(),
                if e.pass { "pass" } else { "fail" }
            )
            .unwrap();
        }
        out
    }
}

/// Verdict settings shared by the statistical checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub k_sigma: f64,
    /// Widen `k` so that the family-wise false-alarm rate over all entries of
    /// a report matches the single-entry rate at `k_sigma`.
    pub bonferroni: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            k_sigma: 3.0,
            bonferroni: false,
        }
    }
}

impl CheckOptions {
    /// Band for `m` simultaneous entries. For a circular complex error the
    /// tail is `P(|z| > kσ) = e^{-k²}`, so dividing it by `m` gives
    /// `k' = √(k² + ln m)`.
    pub fn k_for(&self, m: usize) -> f64 {
        if self.bonferroni && m > 1 {
            (self.k_sigma * self.k_sigma + (m as f64).ln()).sqrt()
        } else {
            self.k_sigma
        }
    }
}

fn probes(model: &GaussianModel, gs: &[Rotation]) -> Vec<Probe> {
    gs.iter().map(|g| model.probe(g)).collect()
}

fn pair_points(pairs: &[(Rotation, Rotation)]) -> Vec<Rotation> {
    pairs.iter().flat_map(|(g, h)| [*g, *h]).collect()
}

/// Monte Carlo `E[X_g·conj(X_h)]` per pair, targeted at `φ(h⁻¹g)`.
pub fn empirical_covariance(
    model: &GaussianModel,
    pairs: &[(Rotation, Rotation)],
    n: usize,
    seed: u64,
    opts: CheckOptions,
) -> EstimatorReport {
    let phi = phi_from_f(model.spectrum());
    let pr = probes(model, &pair_points(pairs));
    let mut vals = vec![ZERO; pr.len()];
    let mom = monte_carlo(n, pairs.len(), |i, out| {
        model.sample_at(&pr, seed, i, &mut vals);
        for (k, o) in out.iter_mut().enumerate() {
            *o = vals[2 * k] * vals[2 * k + 1].conj();
        }
    });
    let k = opts.k_for(pairs.len());
    let mut report = EstimatorReport::new("covariance E[X_g conj X_h]", n);
    for (i, (g, h)) in pairs.iter().enumerate() {
        let target = phi.eval(&h.inverse().compose(g));
        report.entries.push(ReportEntry::new(
            format!("pair {i}"),
            mom.mean(i),
            mom.standard_error(i),
            target,
            Tolerance::Sigma(k),
        ));
    }
    report
}

/// Monte Carlo `E[X_g·X_h]`. The target is zero for complex fields; for a
/// real scalar field it equals the covariance `φ(h⁻¹g)` and the report says so.
pub fn empirical_relation(
    model: &GaussianModel,
    pairs: &[(Rotation, Rotation)],
    n: usize,
    seed: u64,
    opts: CheckOptions,
) -> EstimatorReport {
    let real_field = model.reality() == Reality::RealConstrained;
    let phi = phi_from_f(model.spectrum());
    let pr = probes(model, &pair_points(pairs));
    let mut vals = vec![ZERO; pr.len()];
    let mom = monte_carlo(n, pairs.len(), |i, out| {
        model.sample_at(&pr, seed, i, &mut vals);
        for (k, o) in out.iter_mut().enumerate() {
            *o = vals[2 * k] * vals[2 * k + 1];
        }
    });
    let k = opts.k_for(pairs.len());
    let mut report = EstimatorReport::new("relation E[X_g X_h]", n);
    if real_field {
        report
            .notes
            .push("real field: the relation kernel equals the covariance and cannot vanish".into());
    }
    for (i, (g, h)) in pairs.iter().enumerate() {
        let target = if real_field { phi.eval(&h.inverse().compose(g)) } else { ZERO };
        report.entries.push(ReportEntry::new(
            format!("pair {i}"),
            mom.mean(i),
            mom.standard_error(i),
            target,
            Tolerance::Sigma(k),
        ));
    }
    report
}

/// Quadrature projection of pullback samples onto `D^ℓ_{m,-s}`:
/// `â_{ℓ,m} = √(2ℓ+1)·∫ X·conj(D^ℓ_{m,-s}) dg`, flat in `(ℓ, m)` from `ℓ = |s|`.
#[derive(Clone, Debug)]
pub struct Projector {
    spin: i32,
    band_limit: usize,
    nodes: usize,
    basis: Vec<Complex64>,
}

impl Projector {
    pub fn new(rule: &QuadratureRule<Rotation>, spin: i32, band_limit: usize) -> Result<Self> {
        if rule.band_limit() < band_limit {
            return Err(Error::BandLimit {
                rule: rule.band_limit(),
                requested: band_limit,
            });
        }
        let lo = spin.unsigned_abs() as usize;
        if band_limit < lo {
            return Err(Error::Index {
                ell: band_limit as i64,
                m: 0,
                s: i64::from(spin),
            });
        }
        let width = (band_limit + 1) * (band_limit + 1) - lo * lo;
        let mut basis = Vec::with_capacity(width * rule.len());
        for (g, w) in rule.iter() {
            let cols = wigner_column(-spin, band_limit, g);
            for (ell, col) in cols.iter().enumerate().skip(lo) {
                let scale = w * ((2 * ell + 1) as f64).sqrt();
                basis.extend(col.iter().map(|d| d.conj() * scale));
            }
        }
        Ok(Self {
            spin,
            band_limit,
            nodes: rule.len(),
            basis,
        })
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn width(&self) -> usize {
        self.basis.len() / self.nodes.max(1)
    }

    pub fn project(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.nodes {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for {} quadrature nodes",
                samples.len(),
                self.nodes
            )));
        }
        let w = self.width();
        let mut out = vec![ZERO; w];
        for (v, row) in samples.iter().zip(self.basis.chunks_exact(w)) {
            for (o, b) in out.iter_mut().zip(row) {
                *o += v * b;
            }
        }
        Ok(out)
    }

    /// `(ℓ, m)` of each flat position.
    pub fn labels(&self) -> Vec<(usize, i32)> {
        let lo = self.spin.unsigned_abs() as usize;
        (lo..=self.band_limit)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
            .collect()
    }
}

/// Per-`(ℓ, m)` power, per-`ℓ` pooled power, and cross-coefficient correlations.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub labels: Vec<(usize, i32)>,
    pub mean_power: Vec<(usize, f64)>,
    /// Power of each coefficient against the pooled power of its degree.
    pub equal_power: EstimatorReport,
    /// Normalized `E[â_i·conj(â_j)]` for `i < j`, target zero.
    pub orthogonality: EstimatorReport,
}

impl SpectrumEstimate {
    pub fn passed(&self) -> bool {
        self.equal_power.passed() && self.orthogonality.passed()
    }
}

/// Moments of projected coefficients from `n` realizations.
pub fn estimate_spectrum(coefficients: &[Vec<Complex64>], labels: &[(usize, i32)], opts: CheckOptions) -> Result<SpectrumEstimate> {
    let w = labels.len();
    if coefficients.iter().any(|c| c.len() != w) {
        return Err(Error::ShapeMismatch("coefficient vectors differ from the label count".into()));
    }
    let n = coefficients.len();
    let pairs: Vec<(usize, usize)> = (0..w).flat_map(|i| (i + 1..w).map(move |j| (i, j))).collect();
    let mut power = Moments::new(w);
    let mut cross = Moments::new(pairs.len());
    let mut pbuf = vec![ZERO; w];
    let mut cbuf = vec![ZERO; pairs.len()];
    for a in coefficients {
        for (p, a) in pbuf.iter_mut().zip(a) {
            *p = Complex64::new(a.norm_sqr(), 0.0);
        }
        power.push(&pbuf);
        for (c, &(i, j)) in cbuf.iter_mut().zip(&pairs) {
            *c = a[i] * a[j].conj();
        }
        cross.push(&cbuf);
    }

    let mut mean_power = Vec::new();
    let mut equal_power = EstimatorReport::new("per-m power equals the degree mean", n);
    let k_pow = opts.k_for(w);
    let mut start = 0;
    while start < w {
        let ell = labels[start].0;
        let end = start + labels[start..].iter().take_while(|l| l.0 == ell).count();
        let pooled = (start..end).map(|i| power.mean(i).re).sum::<f64>() / (end - start) as f64;
        mean_power.push((ell, pooled));
        for i in start..end {
            equal_power.entries.push(ReportEntry::new(
                format!("power l={} m={}", labels[i].0, labels[i].1),
                power.mean(i),
                power.standard_error(i),
                Complex64::new(pooled, 0.0),
                Tolerance::Sigma(k_pow),
            ));
        }
        start = end;
    }

    let mut orthogonality = EstimatorReport::new("cross-coefficient correlation", n);
    let k_x = opts.k_for(pairs.len());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let norm = (power.mean(i).re * power.mean(j).re).sqrt();
        let (est, se) = if norm > 0.0 {
            (cross.mean(p) / norm, cross.standard_error(p) / norm)
        } else {
            (ZERO, 0.0)
        };
        orthogonality.entries.push(ReportEntry::new(
            format!("corr ({},{}) ({},{})", labels[i].0, labels[i].1, labels[j].0, labels[j].1),
            est,
            se,
            ZERO,
            Tolerance::Sigma(k_x),
        ));
    }
    Ok(SpectrumEstimate {
        labels: labels.to_vec(),
        mean_power,
        equal_power,
        orthogonality,
    })
}

/// Draw `n` pullback realizations on the rule's nodes and project each.
pub fn sample_projections(
    model: &GaussianModel,
    projector: &Projector,
    rule: &QuadratureRule<Rotation>,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let pr = probes(model, rule.nodes());
    let mut vals = vec![ZERO; pr.len()];
    (0..n as u64)
        .map(|i| {
            model.sample_at(&pr, seed, i, &mut vals);
            projector.project(&vals)
        })
        .collect()
}

/// Results of the Lévy distance law check.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    /// `Var(W_x − W_y)` against `d(x, y)`, `Var(T_x)` against `π/2`, and
    /// `Cov(W_x, W_y)` against `½(d(x,x₀) + d(y,x₀) − d(x,y))`, all at a
    /// relative tolerance.
    pub closed_form: EstimatorReport,
    /// The same statistics against the exact band-limited moments at k-sigma.
    pub band_limited: EstimatorReport,
}

/// Monte Carlo check of `Var(W_x − W_y) = d(x, y)` for Lévy's field at band
/// limit `L`.
pub fn distance_variance_check(
    band_limit: usize,
    pairs: &[(SpherePoint, SpherePoint)],
    n: usize,
    seed: u64,
    rel_tol: f64,
    opts: CheckOptions,
) -> Result<DistanceReport> {
    let f = halfsphere_f_coefficients(band_limit);
    let model = GaussianModel::new(f.clone(), Reality::RealConstrained)?;
    let phi = phi_from_f(&f);
    let pole = SpherePoint::north_pole();
    let mut points = vec![pole];
    for (x, y) in pairs {
        points.push(*x);
        points.push(*y);
    }
    let reps: Vec<Rotation> = points.iter().map(section).collect();
    let pr = probes(&model, &reps);
    let np = pairs.len();
    // per pair: (W_x − W_y)², T_x², T_y², W_x·W_y
    let mut vals = vec![ZERO; pr.len()];
    let mom = monte_carlo(n, 4 * np, |i, out| {
        model.sample_at(&pr, seed, i, &mut vals);
        let t0 = vals[0].re;
        for k in 0..np {
            let tx = vals[1 + 2 * k].re;
            let ty = vals[2 + 2 * k].re;
            let (wx, wy) = (tx - t0, ty - t0);
            out[4 * k] = Complex64::new((wx - wy) * (wx - wy), 0.0);
            out[4 * k + 1] = Complex64::new(tx * tx, 0.0);
            out[4 * k + 2] = Complex64::new(ty * ty, 0.0);
            out[4 * k + 3] = Complex64::new(wx * wy, 0.0);
        }
    });

    // band-limited kernel of T at two points
    let cov_t = |a: &SpherePoint, b: &SpherePoint| phi.eval(&section(b).inverse().compose(&section(a))).re;
    let cov_w = |a: &SpherePoint, b: &SpherePoint| cov_t(a, b) - cov_t(a, &pole) - cov_t(&pole, b) + cov_t(&pole, &pole);

    let rel = Tolerance::Relative { tol: rel_tol, floor: 0.0 };
    let k = opts.k_for(4 * np);
    let mut closed = EstimatorReport::new("Levy distance law (closed form)", n);
    let mut bl = EstimatorReport::new("Levy distance law (band-limited)", n);
    closed.notes.push(format!("band limit {band_limit}"));
    for (i, (x, y)) in pairs.iter().enumerate() {
        let d = x.distance(y);
        let kernel = 0.5 * (x.distance(&pole) + y.distance(&pole) - d);
        let targets_closed = [d, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, kernel];
        let targets_bl = [
            cov_w(x, x) + cov_w(y, y) - 2.0 * cov_w(x, y),
            cov_t(x, x),
            cov_t(y, y),
            cov_w(x, y),
        ];
        let names = [
            format!("pair {i} var(W_x-W_y) d={d:.4}"),
            format!("pair {i} var(T_x)"),
            format!("pair {i} var(T_y)"),
            format!("pair {i} cov(W_x,W_y)"),
        ];
        for j in 0..4 {
            let (est, se) = (mom.mean(4 * i + j), mom.standard_error(4 * i + j));
            // the closed-form covariance at a tiny target is judged on the
            // distance scale of the pair, not on its own magnitude
            let tol_c = if j == 3 {
                Tolerance::Relative {
                    tol: rel_tol,
                    floor: d.max(kernel),
                }
            } else {
                rel
            };
            closed.entries.push(ReportEntry::new(
                names[j].clone(),
                est,
                se,
                Complex64::new(targets_closed[j], 0.0),
                tol_c,
            ));
            bl.entries.push(ReportEntry::new(
                names[j].clone(),
                est,
                se,
                Complex64::new(targets_bl[j], 0.0),
                Tolerance::Sigma(k),
            ));
        }
    }
    Ok(DistanceReport {
        closed_form: closed,
        band_limited: bl,
    })
}

/// Compare second moments at `(Rg, Rh)` with those at `(g, h)` for each `R`.
/// Each entry is the mean over draws of
/// `X_{Rg}·conj(X_{Rh}) − X_g·conj(X_h)`, which has mean zero for an
/// isotropic law; differencing on shared draws cancels most of the noise.
pub fn isotropy_check(
    model: &GaussianModel,
    rotations: &[Rotation],
    pairs: &[(Rotation, Rotation)],
    n: usize,
    seed: u64,
    opts: CheckOptions,
) -> EstimatorReport {
    let mut gs = pair_points(pairs);
    for r in rotations {
        gs.extend(pairs.iter().flat_map(|(g, h)| [r.compose(g), r.compose(h)]));
    }
    let pr = probes(model, &gs);
    let np = pairs.len();
    let stats = rotations.len() * np;
    let mut vals = vec![ZERO; pr.len()];
    let mom = monte_carlo(n, stats, |i, out| {
        model.sample_at(&pr, seed, i, &mut vals);
        for r in 0..rotations.len() {
            for p in 0..np {
                let base = vals[2 * p] * vals[2 * p + 1].conj();
                let off = 2 * np * (r + 1);
                let moved = vals[off + 2 * p] * vals[off + 2 * p + 1].conj();
                out[r * np + p] = moved - base;
            }
        }
    });
    let k = opts.k_for(stats);
    let mut report = EstimatorReport::new("isotropy of second moments", n);
    if !model.is_isotropic() {
        report.notes.push("model carries m-dependent mode weights".into());
    }
    for r in 0..rotations.len() {
        for p in 0..np {
            let i = r * np + p;
            report.entries.push(ReportEntry::new(
                format!("rotation {r} pair {p}"),
                mom.mean(i),
                mom.standard_error(i),
                ZERO,
                Tolerance::Sigma(k),
            ));
        }
    }
    report
}

/// Covariance kernel of a scalar spectrum between two sphere points.
pub fn scalar_kernel(phi: &CovarianceSpectrum, x: &SpherePoint, y: &SpherePoint) -> f64 {
    phi.eval(&section(y).inverse().compose(&section(x))).re
}
