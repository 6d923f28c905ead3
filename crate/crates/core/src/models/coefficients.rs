use std::collections::BTreeMap;
use std::io::Read;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Fourier coefficients indexed by one integer.
pub type Coefficients = BTreeMap<i64, Complex64>;
/// Kernel coefficients indexed by `(m, n)`.
pub type KernelCoefficients = BTreeMap<(i64, i64), Complex64>;

fn records<R: Read>(reader: R, ints: usize) -> Result<Vec<(usize, Vec<i64>, Complex64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let header = first && rec.get(0).is_some_and(|f| f.parse::<i64>().is_err());
        first = false;
        if header {
            continue;
        }
        if rec.len() != ints + 2 {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", ints + 2, rec.len()) });
        }
        let mut idx = Vec::with_capacity(ints);
        for f in rec.iter().take(ints) {
            idx.push(f.parse::<i64>().map_err(|_| Error::Parse { line, message: format!("bad index '{f}'") })?);
        }
        let num = |f: &str| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line, message: format!("bad number '{f}'") })
        };
        let z = Complex64::new(num(&rec[ints])?, num(&rec[ints + 1])?);
        out.push((line, idx, z));
    }
    Ok(out)
}

/// Rows `k, re, im`; `#` comments and one header line allowed, duplicates rejected.
pub fn parse_coefficients<R: Read>(reader: R) -> Result<Coefficients> {
    let mut out = Coefficients::new();
    for (line, idx, z) in records(reader, 1)? {
        if out.insert(idx[0], z).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate index {}", idx[0]) });
        }
    }
    Ok(out)
}

/// Rows `m, n, re, im`.
pub fn parse_kernel_coefficients<R: Read>(reader: R) -> Result<KernelCoefficients> {
    let mut out = KernelCoefficients::new();
    for (line, idx, z) in records(reader, 2)? {
        if out.insert((idx[0], idx[1]), z).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate index ({}, {})", idx[0], idx[1]) });
        }
    }
    Ok(out)
}

/// Rows `j, k, re, im` with `j` in 1..=4 naming the matrix entry.
pub fn parse_matrix_coefficients<R: Read>(reader: R) -> Result<[Coefficients; 4]> {
    let mut out: [Coefficients; 4] = Default::default();
    for (line, idx, z) in records(reader, 2)? {
        let j = idx[0];
        if !(1..=4).contains(&j) {
            return Err(Error::Parse { line, message: format!("component {j} not in 1..=4") });
        }
        if out[(j - 1) as usize].insert(idx[1], z).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate index ({j}, {})", idx[1]) });
        }
    }
    Ok(out)
}

pub fn coefficient(c: &Coefficients, k: i64) -> Complex64 {
    c.get(&k).copied().unwrap_or_default()
}

/// `||v||^2 = sum |v_k|^2`.
pub fn l2_norm_sqr(c: &Coefficients) -> f64 {
    c.values().map(|z| z.norm_sqr()).sum()
}

/// Largest `|k|` with a nonzero coefficient.
pub fn support_radius(c: &Coefficients) -> i64 {
    c.iter().filter(|(_, z)| **z != Complex64::default()).map(|(k, _)| k.abs()).max().unwrap_or(0)
}

/// Trigonometric polynomial of the given degree with coefficients uniform in
/// the unit square; `real` enforces `v(-k) = conj v(k)`.
pub fn random_trig_poly<R: Rng>(rng: &mut R, degree: i64, real: bool) -> Coefficients {
    let mut out = Coefficients::new();
    for k in -degree..=degree {
        if real && k < 0 {
            continue;
        }
        let mut z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if real && k == 0 {
            z.im = 0.0;
        }
        out.insert(k, z);
        if real && k > 0 {
            out.insert(-k, z.conj());
        }
    }
    out
}
