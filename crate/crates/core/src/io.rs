//! File formats: spectrum documents (JSON) and field realizations (text or
//! packed little-endian binary). Numbers are written with 17 significant
//! digits.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fieldsynth::{FieldRealization, Grid, Provenance};
use crate::so3::{Rotation, SpherePoint};
use crate::spectral::{phi_from_f, sqrt_spectrum, CovarianceSpectrum, SignPolicy, SpinSpectrum};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumDocument {
    Covariance(CovarianceSpectrum),
    Root(SpinSpectrum),
}

impl SpectrumDocument {
    /// Synthesis filter: the document itself for a root, the all-plus square
    /// root for a covariance.
    pub fn root(&self) -> Result<SpinSpectrum> {
        match self {
            SpectrumDocument::Covariance(c) => sqrt_spectrum(c, &SignPolicy::AllPlus),
            SpectrumDocument::Root(f) => Ok(f.clone()),
        }
    }

    pub fn covariance(&self) -> CovarianceSpectrum {
        match self {
            SpectrumDocument::Covariance(c) => c.clone(),
            SpectrumDocument::Root(f) => phi_from_f(f),
        }
    }

    pub fn spin(&self) -> i32 {
        match self {
            SpectrumDocument::Covariance(c) => c.spin(),
            SpectrumDocument::Root(f) => f.spin(),
        }
    }

    pub fn band_limit(&self) -> usize {
        match self {
            SpectrumDocument::Covariance(c) => c.band_limit(),
            SpectrumDocument::Root(f) => f.band_limit(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectrumDocument::Covariance(_) => "covariance",
            SpectrumDocument::Root(_) => "root",
        }
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        match self {
            SpectrumDocument::Covariance(c) => c.coefficients().iter().map(|&c| (c, 0.0)).collect(),
            SpectrumDocument::Root(f) => f.coefficients().iter().map(|a| (a.re, a.im)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{{").unwrap();
        writeln!(out, "  \"spin\": {},", self.spin()).unwrap();
        writeln!(out, "  \"band_limit\": {},", self.band_limit()).unwrap();
        writeln!(out, "  \"kind\": \"{}\",", self.kind()).unwrap();
        writeln!(out, "  \"coefficients\": [").unwrap();
        let pairs = self.pairs();
        for (i, (re, im)) in pairs.iter().enumerate() {
            let sep = if i + 1 == pairs.len() { "" } else { "," };
            writeln!(out, "    [{}, {}]{sep}", fmt_f64(*re), fmt_f64(*im)).unwrap();
        }
        writeln!(out, "  ]").unwrap();
        writeln!(out, "}}").unwrap();
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            spin: i32,
            band_limit: usize,
            kind: String,
            coefficients: Vec<[f64; 2]>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        match raw.kind.as_str() {
            "covariance" => {
                if let Some(p) = raw.coefficients.iter().find(|p| p[1] != 0.0) {
                    return Err(Error::Format(format!(
                        "covariance coefficients must be real, found imaginary part {}",
                        p[1]
                    )));
                }
                let c = raw.coefficients.iter().map(|p| p[0]).collect();
                Ok(SpectrumDocument::Covariance(CovarianceSpectrum::new(raw.spin, raw.band_limit, c)?))
            }
            "root" => {
                let a = raw.coefficients.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                Ok(SpectrumDocument::Root(SpinSpectrum::new(raw.spin, raw.band_limit, a)?))
            }
            other => Err(Error::Format(format!("unknown spectrum kind {other:?}"))),
        }
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Short content hash of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

pub fn spectrum_hash_root(f: &SpinSpectrum) -> String {
    SpectrumDocument::Root(f.clone()).hash()
}

pub fn spectrum_hash_covariance(phi: &CovarianceSpectrum) -> String {
    SpectrumDocument::Covariance(phi.clone()).hash()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Packed,
}

const PACKED_MAGIC: &[u8; 8] = b"SPFIELD1";

fn header_line(r: &FieldRealization) -> String {
    format!(
        "# spin={} band_limit={} seed={} grid={} spectrum={}",
        r.spin,
        r.band_limit,
        r.provenance.seed,
        r.grid.kind(),
        r.provenance.spectrum_id
    )
}

fn coordinates(grid: &Grid) -> Vec<Vec<f64>> {
    match grid {
        Grid::Equiangular { points, .. } | Grid::Points(points) => {
            points.iter().map(|p| vec![p.theta(), p.phi()]).collect()
        }
        Grid::Rotations(rs) => rs.iter().map(|r| vec![r.alpha(), r.beta(), r.gamma()]).collect(),
    }
}

/// Header line, then one `theta phi re im` record per node (`alpha beta
/// gamma re im` on rotation grids).
pub fn realization_to_text(r: &FieldRealization) -> String {
    let mut out = header_line(r);
    out.push('\n');
    for (xs, v) in coordinates(&r.grid).iter().zip(&r.values) {
        let cols: Vec<String> = xs.iter().chain([v.re, v.im].iter()).map(|&x| fmt_f64(x)).collect();
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

/// Magic `SPFIELD1`, then `spin: i64`, `band_limit: u64`, `seed: u64`,
/// `columns: u64`, `records: u64`, then the records as `f64`, all
/// little-endian, in the text column order.
pub fn realization_to_packed(r: &FieldRealization) -> Vec<u8> {
    let coords = coordinates(&r.grid);
    let columns = coords.first().map_or(2, Vec::len) + 2;
    let mut out = Vec::with_capacity(48 + 8 * columns * r.values.len());
    out.extend_from_slice(PACKED_MAGIC);
    out.extend_from_slice(&i64::from(r.spin).to_le_bytes());
    out.extend_from_slice(&(r.band_limit as u64).to_le_bytes());
    out.extend_from_slice(&r.provenance.seed.to_le_bytes());
    out.extend_from_slice(&(columns as u64).to_le_bytes());
    out.extend_from_slice(&(r.values.len() as u64).to_le_bytes());
    for (xs, v) in coords.iter().zip(&r.values) {
        for x in xs.iter().chain([v.re, v.im].iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn write_realization<W: Write>(r: &FieldRealization, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Text => w.write_all(realization_to_text(r).as_bytes())?,
        Format::Packed => w.write_all(&realization_to_packed(r))?,
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(i32, usize, u64, String, String)> {
    let body = line
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("missing realization header".into()))?;
    let mut spin = None;
    let mut band = None;
    let mut seed = None;
    let mut grid = None;
    let mut spectrum = String::new();
    for field in body.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {field:?}")))?;
        let bad = |_| Error::Format(format!("bad header value {field:?}"));
        match k {
            "spin" => spin = Some(v.parse().map_err(|e: std::num::ParseIntError| bad(e))?),
            "band_limit" => band = Some(v.parse().map_err(|e: std::num::ParseIntError| bad(e))?),
            "seed" => seed = Some(v.parse().map_err(|e: std::num::ParseIntError| bad(e))?),
            "grid" => grid = Some(v.to_string()),
            "spectrum" => spectrum = v.to_string(),
            _ => return Err(Error::Format(format!("unknown header field {k:?}"))),
        }
    }
    match (spin, band, seed, grid) {
        (Some(s), Some(b), Some(seed), Some(g)) => Ok((s, b, seed, g, spectrum)),
        _ => Err(Error::Format("incomplete realization header".into())),
    }
}

fn grid_from_records(kind: &str, coords: Vec<Vec<f64>>) -> Result<Grid> {
    if kind == "rotations" {
        return Ok(Grid::Rotations(
            coords.iter().map(|c| Rotation::from_euler(c[0], c[1], c[2])).collect(),
        ));
    }
    let points: Vec<SpherePoint> = coords.iter().map(|c| SpherePoint::new(c[0], c[1])).collect();
    if let Some(dims) = kind.strip_prefix("equiangular:") {
        let (t, p) = dims
            .split_once('x')
            .ok_or_else(|| Error::Format(format!("bad grid kind {kind:?}")))?;
        let n_theta = t.parse().map_err(|_| Error::Format(format!("bad grid kind {kind:?}")))?;
        let n_phi = p.parse().map_err(|_| Error::Format(format!("bad grid kind {kind:?}")))?;
        return Ok(Grid::Equiangular {
            n_theta,
            n_phi,
            points,
        });
    }
    if kind == "points" {
        return Ok(Grid::Points(points));
    }
    Err(Error::Format(format!("unknown grid kind {kind:?}")))
}

pub fn realization_from_text(text: &str) -> Result<FieldRealization> {
    let mut lines = text.lines();
    let (spin, band_limit, seed, kind, spectrum_id) =
        parse_header(lines.next().ok_or_else(|| Error::Format("empty realization".into()))?)?;
    let columns = if kind == "rotations" { 5 } else { 4 };
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (n, line) in lines.enumerate() {
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("record {}: {e}", n + 1)))?;
        if xs.len() != columns {
            return Err(Error::Format(format!("record {} has {} columns", n + 1, xs.len())));
        }
        values.push(Complex64::new(xs[columns - 2], xs[columns - 1]));
        coords.push(xs[..columns - 2].to_vec());
    }
    Ok(FieldRealization {
        spin,
        band_limit,
        grid: grid_from_records(&kind, coords)?,
        values,
        provenance: Provenance { spectrum_id, seed },
    })
}

/// Raw records of a packed file: `(spin, band_limit, seed, rows)`.
pub fn read_packed<R: Read>(mut r: R) -> Result<(i32, usize, u64, Vec<Vec<f64>>)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 48 || &buf[..8] != PACKED_MAGIC {
        return Err(Error::Format("not a packed realization".into()));
    }
    let word = |i: usize| -> [u8; 8] { buf[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
    let spin = i64::from_le_bytes(word(0)) as i32;
    let band = u64::from_le_bytes(word(1)) as usize;
    let seed = u64::from_le_bytes(word(2));
    let columns = u64::from_le_bytes(word(3)) as usize;
    let records = u64::from_le_bytes(word(4)) as usize;
    if buf.len() != 48 + 8 * columns * records {
        return Err(Error::Format("packed realization has the wrong length".into()));
    }
    let rows = buf[48..]
        .chunks_exact(8 * columns)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok((spin, band, seed, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldsynth::{draw_coefficients, synthesize_field, Reality};

    #[test]
    fn spectrum_round_trip() {
        let f = SpinSpectrum::new(
            -2,
            4,
            vec![Complex64::new(0.1, -1.0 / 3.0), Complex64::new(2.0, 0.0), Complex64::new(-1e-300, 7.0)],
        )
        .unwrap();
        let doc = SpectrumDocument::Root(f);
        let back = SpectrumDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.hash(), doc.hash());
        let cov = SpectrumDocument::Covariance(CovarianceSpectrum::scalar(&[std::f64::consts::PI, 0.0, 1.0 / 7.0]).unwrap());
        assert_eq!(SpectrumDocument::from_json(&cov.to_json()).unwrap(), cov);
        assert!(cov.to_json().contains("3.1415926535897931e0"));
    }

    #[test]
    fn spectrum_format_errors() {
        assert!(matches!(SpectrumDocument::from_json("{"), Err(Error::Format(_))));
        let bad_kind = r#"{"spin":0,"band_limit":0,"kind":"x","coefficients":[[1,0]]}"#;
        assert!(matches!(SpectrumDocument::from_json(bad_kind), Err(Error::Format(_))));
        let complex_cov = r#"{"spin":0,"band_limit":0,"kind":"covariance","coefficients":[[1,1]]}"#;
        assert!(matches!(SpectrumDocument::from_json(complex_cov), Err(Error::Format(_))));
        let short = r#"{"spin":1,"band_limit":3,"kind":"root","coefficients":[[1,0]]}"#;
        assert!(matches!(SpectrumDocument::from_json(short), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn realization_round_trips() {
        let f = SpinSpectrum::new(1, 3, vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        let d = draw_coefficients(&f, 5, Reality::ComplexGaussian).unwrap();
        let r = synthesize_field(&f, &d, Grid::equiangular(3, 5).unwrap()).unwrap();
        let text = realization_to_text(&r);
        assert!(text.starts_with("# spin=1 band_limit=3 seed=5 grid=equiangular:3x5 spectrum="));
        let back = realization_from_text(&text).unwrap();
        assert_eq!(back.values, r.values);
        assert_eq!(back.provenance, r.provenance);
        assert_eq!(realization_to_text(&back), text);

        let (spin, band, seed, rows) = read_packed(&realization_to_packed(&r)[..]).unwrap();
        assert_eq!((spin, band, seed, rows.len()), (1, 3, 5, 15));
        assert_eq!(rows[4][2], r.values[4].re);
        assert_eq!(rows[4][3], r.values[4].im);
        assert!(read_packed(&b"nonsense"[..]).is_err());
    }
}
