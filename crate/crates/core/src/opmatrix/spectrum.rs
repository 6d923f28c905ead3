use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Finite window `[-N, N]` standing in for the full index set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationWindow {
    half_width: usize,
    interior_fraction: f64,
}

impl TruncationWindow {
    pub fn new(half_width: usize, interior_fraction: f64) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::invalid("window half-width must be positive"));
        }
        if !(interior_fraction > 0.0 && interior_fraction <= 1.0) {
            return Err(Error::invalid(format!("interior fraction {interior_fraction} not in (0,1]")));
        }
        let w = TruncationWindow { half_width, interior_fraction };
        if w.interior_half_width() == 0 {
            return Err(Error::invalid("interior half-width floor(fraction*N) must be at least 1"));
        }
        Ok(w)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn interior_fraction(&self) -> f64 {
        self.interior_fraction
    }

    pub fn interior_half_width(&self) -> usize {
        (self.interior_fraction * self.half_width as f64).floor() as usize
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<i64> {
        let n = self.half_width as i64;
        -n..=n
    }

    pub fn is_interior(&self, label: i64) -> bool {
        label.unsigned_abs() as usize <= self.interior_half_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEntry {
    pub index: i64,
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Eigenvalues of the free operator with their multiplicities.
///
/// Each entry owns a run of consecutive basis vectors; entries are kept
/// sorted by index.
#[derive(Debug, Clone)]
pub struct Spectrum {
    entries: Vec<SpectralEntry>,
    window: TruncationWindow,
    offsets: Vec<usize>,
    basis_entry: Vec<usize>,
    basis_values: Vec<Complex64>,
    derived: bool,
}

impl Spectrum {
    /// Strict constructor: indices must be exactly `-N..=N`, each once.
    pub fn new(window: TruncationWindow, entries: Vec<SpectralEntry>) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.index);
        let n = window.half_width() as i64;
        if entries.len() != (2 * n + 1) as usize {
            return Err(Error::invalid(format!(
                "spectrum has {} entries, window [-{n}, {n}] needs {}",
                entries.len(),
                2 * n + 1
            )));
        }
        for (k, e) in entries.iter().enumerate() {
            if e.index != k as i64 - n {
                return Err(Error::invalid(format!("indices must form the contiguous range [-{n}, {n}]")));
            }
        }
        Self::assemble(window, entries, false)
    }

    /// Spectrum of a modified free operator: labels may repeat but must lie
    /// in the window. Used when a diagonal part is absorbed into `A`.
    pub fn derived(window: TruncationWindow, entries: Vec<SpectralEntry>) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.index);
        let n = window.half_width() as i64;
        if entries.iter().any(|e| e.index.abs() > n) {
            return Err(Error::invalid("derived spectrum label outside the window"));
        }
        Self::assemble(window, entries, true)
    }

    /// `lambda(k)` with uniform multiplicity over the window.
    pub fn from_fn(window: TruncationWindow, multiplicity: usize, lambda: impl Fn(i64) -> Complex64) -> Result<Self> {
        let entries = window.labels().map(|k| SpectralEntry { index: k, value: lambda(k), multiplicity }).collect();
        Self::new(window, entries)
    }

    fn assemble(window: TruncationWindow, entries: Vec<SpectralEntry>, derived: bool) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("spectrum is empty"));
        }
        let mut offsets = Vec::with_capacity(entries.len() + 1);
        let mut basis_entry = Vec::new();
        let mut basis_values = Vec::new();
        offsets.push(0);
        for (pos, e) in entries.iter().enumerate() {
            if e.multiplicity == 0 {
                return Err(Error::invalid(format!("multiplicity of index {} is zero", e.index)));
            }
            if !e.value.re.is_finite() || !e.value.im.is_finite() {
                return Err(Error::invalid(format!("eigenvalue at index {} is not finite", e.index)));
            }
            for _ in 0..e.multiplicity {
                basis_entry.push(pos);
                basis_values.push(e.value);
            }
            offsets.push(basis_entry.len());
        }
        let values: Vec<Complex64> = entries.iter().map(|e| e.value).collect();
        if values.len() >= 2 && separation_of(&values)? == 0.0 {
            let msg = "eigenvalues are not pairwise distinct";
            return Err(if derived { Error::AssumptionViolation(msg.into()) } else { Error::invalid(msg) });
        }
        Ok(Spectrum { entries, window, offsets, basis_entry, basis_values, derived })
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total basis dimension, the sum of multiplicities.
    pub fn dim(&self) -> usize {
        self.basis_entry.len()
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn is_derived(&self) -> bool {
        self.derived
    }

    pub fn basis_range(&self, pos: usize) -> std::ops::Range<usize> {
        self.offsets[pos]..self.offsets[pos + 1]
    }

    pub fn entry_of_basis(&self, i: usize) -> usize {
        self.basis_entry[i]
    }

    pub fn label_of_basis(&self, i: usize) -> i64 {
        self.entries[self.basis_entry[i]].index
    }

    /// Eigenvalue attached to every basis vector, i.e. the diagonal of `A`.
    pub fn basis_values(&self) -> &[Complex64] {
        &self.basis_values
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// First entry carrying `index`.
    pub fn position(&self, index: i64) -> Option<usize> {
        self.entries.iter().position(|e| e.index == index)
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.multiplicity).collect()
    }

    /// Largest modulus of an eigenvalue, the operator norm of the diagonal `A`.
    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm()).fold(0.0, f64::max)
    }
}

/// `min |a - b|` over distinct pairs.
pub fn separation_of(values: &[Complex64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid("separation needs at least two eigenvalues"));
    }
    let mut best = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    Ok(best)
}

/// `max_j sum_{n != j} |lambda_n - lambda_j|^{-2}`.
pub fn eta_of(values: &[Complex64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("eta needs a nonempty spectrum"));
    }
    let mut best = 0.0f64;
    for (j, a) in values.iter().enumerate() {
        let mut s = 0.0;
        for (n, b) in values.iter().enumerate() {
            if n != j {
                let d = (a - b).norm_sqr();
                if d == 0.0 {
                    return Err(Error::invalid("eta needs distinct eigenvalues"));
                }
                s += 1.0 / d;
            }
        }
        best = best.max(s);
    }
    Ok(best)
}

pub fn separation_delta(spec: &Spectrum) -> Result<f64> {
    separation_of(&spec.values())
}

pub fn eta_constant(spec: &Spectrum) -> Result<f64> {
    eta_of(&spec.values())
}
