use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmatrix::{gemm, BlockMatrix, CMatrix, Spectrum};

/// `(A-B)(I+U) - (I+U)(A-V)` with `A` the diagonal free operator.
pub fn similarity_defect(spectrum: &Spectrum, b: &BlockMatrix, u: &BlockMatrix, v: &BlockMatrix) -> Result<CMatrix> {
    let d = spectrum.dim();
    for x in [b, u, v] {
        if x.dim() != d {
            return Err(Error::mismatch("defect operands do not match the spectrum dimension"));
        }
    }
    let lambda = spectrum.basis_values();
    let ud = u.dense();
    // AU - UA - B - BU + V + UV
    let mut out = CMatrix::from_fn(d, d, |i, j| (lambda[i] - lambda[j]) * ud[(i, j)]);
    out -= b.dense();
    out -= gemm(b.dense(), ud);
    out += v.dense();
    out += gemm(ud, v.dense());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub full: f64,
    pub interior: f64,
    /// `||A||_op + ||B||_hs`.
    pub scale: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.full / self.scale
        } else {
            self.full
        }
    }
}

fn interior_norm(spectrum: &Spectrum, m: &CMatrix) -> f64 {
    let w = spectrum.window();
    let keep: Vec<usize> = (0..spectrum.dim()).filter(|&i| w.is_interior(spectrum.label_of_basis(i))).collect();
    let mut s = 0.0;
    for &j in &keep {
        for &i in &keep {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Hilbert–Schmidt norm of the similarity defect, on the whole window and
/// restricted to the interior indices.
pub fn similarity_residual(
    spectrum: &Spectrum,
    b: &BlockMatrix,
    u: &BlockMatrix,
    v: &BlockMatrix,
) -> Result<ResidualReport> {
    let defect = similarity_defect(spectrum, b, u, v)?;
    Ok(ResidualReport {
        full: defect.norm(),
        interior: interior_norm(spectrum, &defect),
        scale: spectrum.max_modulus() + b.hs(),
    })
}

/// Norm of the entries of `v` that couple different groups.
pub fn offdiagonal_norm(groups: &[usize], v: &CMatrix) -> f64 {
    let mut s = 0.0;
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            if groups[i] != groups[j] {
                s += v[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// `A - V` restricted to each group, as dense blocks.
pub fn diagonal_blocks(spectrum: &Spectrum, groups: &[Vec<usize>], v: &CMatrix) -> Vec<CMatrix> {
    let lambda = spectrum.basis_values();
    groups
        .iter()
        .map(|g| {
            CMatrix::from_fn(g.len(), g.len(), |i, j| {
                let a = if i == j { lambda[g[i]] } else { Complex64::new(0.0, 0.0) };
                a - v[(g[i], g[j])]
            })
        })
        .collect()
}
