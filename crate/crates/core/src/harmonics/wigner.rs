//! Wigner `d` and `D` matrices.
//!
//! Phase convention: with `χ_m(k(γ)) = e^{imγ}` and `D^ℓ(k) v_m = χ_m(k) v_m`,
//!
//! ```text
//! D^ℓ_{m,n}(α, β, γ) = e^{imα} · d^ℓ_{m,n}(β) · e^{inγ}
//! ```
//!
//! where `d^ℓ` is the usual real little-d matrix (`d^ℓ_{0,0}(β) = P_ℓ(cos β)`,
//! `d^ℓ(0) = I`). This is the complex conjugate of the textbook
//! `e^{-imα} d e^{-inγ}` form, and is a homomorphism for the z-y-z
//! parametrization used by [`Rotation`].
//!
//! Entries are produced by the three-term recurrence in `ℓ` at fixed
//! `(m, n)`, seeded at `ℓ = max(|m|, |n|)` where the explicit sum has a single
//! term evaluated in log space.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::so3::Rotation;

const LN_FACT_TABLE: usize = 4096;

fn ln_factorial(n: i64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    debug_assert!(n >= 0);
    let n = n as usize;
    if n < LN_FACT_TABLE {
        table[n]
    } else {
        table[LN_FACT_TABLE - 1] + (LN_FACT_TABLE..=n).map(|k| (k as f64).ln()).sum::<f64>()
    }
}

fn pow_part(base: f64, exp: i64) -> Option<f64> {
    // ln(base^exp), or None for an exact zero
    if exp == 0 {
        Some(0.0)
    } else if base == 0.0 {
        None
    } else {
        Some(exp as f64 * base.abs().ln())
    }
}

/// Explicit sum for `d^j_{m,n}(β)`; every term is assembled in log space.
/// Used to seed the recurrence, where exactly one term survives.
fn d_explicit(j: i64, m: i64, n: i64, beta: f64) -> f64 {
    let (s, c) = (0.5 * beta).sin_cos();
    let pref = 0.5 * (ln_factorial(j + m) + ln_factorial(j - m) + ln_factorial(j + n) + ln_factorial(j - n));
    let lo = 0.max(n - m);
    let hi = (j + n).min(j - m);
    let mut sum = 0.0;
    for k in lo..=hi {
        let pc = 2 * j + n - m - 2 * k;
        let ps = m - n + 2 * k;
        let (Some(lc), Some(ls)) = (pow_part(c, pc), pow_part(s, ps)) else {
            continue;
        };
        let ln = pref
            - ln_factorial(j + n - k)
            - ln_factorial(k)
            - ln_factorial(m - n + k)
            - ln_factorial(j - m - k)
            + lc
            + ls;
        let mut sign = if (m - n + k) % 2 == 0 { 1.0 } else { -1.0 };
        if c < 0.0 && pc % 2 == 1 {
            sign = -sign;
        }
        if s < 0.0 && ps % 2 == 1 {
            sign = -sign;
        }
        sum += sign * ln.exp();
    }
    sum
}

/// `d^ℓ_{m,n}(β)` for every `ℓ ∈ 0..=band_limit` (zero where `ℓ < max(|m|,|n|)`).
pub fn wigner_d_series(m: i32, n: i32, band_limit: usize, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; band_limit + 1];
    let j0 = m.unsigned_abs().max(n.unsigned_abs()) as usize;
    if j0 > band_limit {
        return out;
    }
    let cb = beta.cos();
    let (mf, nf) = (f64::from(m), f64::from(n));
    let mn = mf * nf;
    let (m2, n2) = (mf * mf, nf * nf);
    let mut prev = 0.0;
    let mut cur = d_explicit(j0 as i64, i64::from(m), i64::from(n), beta);
    out[j0] = cur;
    for j in j0..band_limit {
        let jf = j as f64;
        let j1 = jf + 1.0;
        let denom = ((j1 * j1 - m2) * (j1 * j1 - n2)).sqrt();
        let a = j1 * (2.0 * jf + 1.0) / denom;
        let next = if j == 0 {
            a * cb * cur
        } else {
            let b = j1 * ((jf * jf - m2) * (jf * jf - n2)).sqrt() / (jf * denom);
            a * (cb - mn / (jf * j1)) * cur - b * prev
        };
        prev = cur;
        cur = next;
        out[j + 1] = next;
    }
    out
}

/// Real little-d matrix `d^ℓ(β)`, rows and columns indexed `m, n = -ℓ..=ℓ`
/// at offset `ℓ`.
pub fn wigner_d(ell: usize, beta: f64) -> DMatrix<f64> {
    let l = ell as i32;
    let dim = 2 * ell + 1;
    let mut d = DMatrix::zeros(dim, dim);
    for m in -l..=l {
        for n in -l..=l {
            d[((m + l) as usize, (n + l) as usize)] = wigner_d_series(m, n, ell, beta)[ell];
        }
    }
    d
}

/// All blocks `d^0(β), …, d^L(β)` in one pass.
pub fn wigner_d_all(band_limit: usize, beta: f64) -> Vec<DMatrix<f64>> {
    let l = band_limit as i32;
    let mut blocks: Vec<DMatrix<f64>> = (0..=band_limit).map(|e| DMatrix::zeros(2 * e + 1, 2 * e + 1)).collect();
    for m in -l..=l {
        for n in -l..=l {
            let series = wigner_d_series(m, n, band_limit, beta);
            let j0 = m.unsigned_abs().max(n.unsigned_abs()) as usize;
            for (ell, block) in blocks.iter_mut().enumerate().skip(j0) {
                let e = ell as i32;
                block[((m + e) as usize, (n + e) as usize)] = series[ell];
            }
        }
    }
    blocks
}

/// One unitary block `D^ℓ(g)` of the Wigner representation.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerBlock {
    ell: usize,
    entries: DMatrix<Complex64>,
}

impl WignerBlock {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Entry `D^ℓ_{m,n}`; panics when `|m|` or `|n|` exceeds `ℓ`.
    pub fn get(&self, m: i32, n: i32) -> Complex64 {
        let l = self.ell as i32;
        assert!(m.abs() <= l && n.abs() <= l, "index ({m},{n}) outside block {l}");
        self.entries[((m + l) as usize, (n + l) as usize)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

fn phases(ell: i32, angle: f64) -> Vec<Complex64> {
    (-ell..=ell)
        .map(|m| Complex64::from_polar(1.0, f64::from(m) * angle))
        .collect()
}

/// Full Wigner block `D^ℓ(r)`.
pub fn wigner_big_d(ell: usize, r: &Rotation) -> WignerBlock {
    let l = ell as i32;
    let d = wigner_d(ell, r.beta());
    let pa = phases(l, r.alpha());
    let pg = phases(l, r.gamma());
    let entries = DMatrix::from_fn(2 * ell + 1, 2 * ell + 1, |i, j| pa[i] * d[(i, j)] * pg[j]);
    WignerBlock { ell, entries }
}

/// Single entry `D^ℓ_{m,n}(r)`; zero when an index exceeds `ℓ`.
pub fn wigner_entry(ell: usize, m: i32, n: i32, r: &Rotation) -> Complex64 {
    let l = ell as i32;
    if m.abs() > l || n.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    let d = wigner_d_series(m, n, ell, r.beta())[ell];
    Complex64::from_polar(d, f64::from(m) * r.alpha() + f64::from(n) * r.gamma())
}

/// Column `n` of every block up to `band_limit`: `out[ℓ][m + ℓ] = D^ℓ_{m,n}(r)`.
/// Blocks with `ℓ < |n|` are left empty.
pub fn wigner_column(n: i32, band_limit: usize, r: &Rotation) -> Vec<Vec<Complex64>> {
    let l = band_limit as i32;
    let mut out: Vec<Vec<Complex64>> = (0..=band_limit)
        .map(|e| {
            if e < n.unsigned_abs() as usize {
                Vec::new()
            } else {
                vec![Complex64::new(0.0, 0.0); 2 * e + 1]
            }
        })
        .collect();
    if n.unsigned_abs() as usize > band_limit {
        return out;
    }
    let col_phase = Complex64::from_polar(1.0, f64::from(n) * r.gamma());
    for m in -l..=l {
        let series = wigner_d_series(m, n, band_limit, r.beta());
        let ph = Complex64::from_polar(1.0, f64::from(m) * r.alpha()) * col_phase;
        let j0 = m.unsigned_abs().max(n.unsigned_abs()) as usize;
        for ell in j0..=band_limit {
            out[ell][(m + ell as i32) as usize] = ph * series[ell];
        }
    }
    out
}
