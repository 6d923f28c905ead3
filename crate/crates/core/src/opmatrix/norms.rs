use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::block::{gemm, BlockMatrix, CMatrix};
use super::partition::Partition;
use crate::error::{Error, Result};

const POWER_TOL: f64 = 1e-12;
const POWER_SEED: u64 = 0x5eed_0f0b;
const MAX_CONDITION: f64 = 1e12;
const INVERSE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub hs: f64,
    pub hs_sigma: f64,
    pub op: f64,
}

/// Spectral norm of a small dense block.
pub fn block_norm(b: &CMatrix) -> f64 {
    if b.nrows() == 0 || b.ncols() == 0 {
        return 0.0;
    }
    if b.nrows() == 1 || b.ncols() == 1 {
        return b.norm();
    }
    b.clone().svd(false, false).singular_values.max()
}

/// Squared block norms summed per block row and per block column.
pub fn group_row_col_sums(x: &BlockMatrix, partition: &Partition) -> Result<(Vec<f64>, Vec<f64>)> {
    if !x.partition().same_spectrum(partition) {
        return Err(Error::mismatch("norm partition belongs to another spectrum"));
    }
    let g = partition.len();
    let mut rows = vec![0.0; g];
    let mut cols = vec![0.0; g];
    let data = x.dense();
    if partition.is_scalar() {
        for j in 0..data.ncols() {
            let gj = partition.group_of_basis(j);
            for i in 0..data.nrows() {
                let v = data[(i, j)].norm_sqr();
                rows[partition.group_of_basis(i)] += v;
                cols[gj] += v;
            }
        }
        return Ok((rows, cols));
    }
    let groups = partition.groups();
    for (m, gm) in groups.iter().enumerate() {
        for (n, gn) in groups.iter().enumerate() {
            let v = if gm.basis.len() == 1 || gn.basis.len() == 1 {
                let mut s = 0.0;
                for &i in &gm.basis {
                    for &j in &gn.basis {
                        s += data[(i, j)].norm_sqr();
                    }
                }
                s
            } else {
                let b = CMatrix::from_fn(gm.basis.len(), gn.basis.len(), |i, j| data[(gm.basis[i], gn.basis[j])]);
                block_norm(&b).powi(2)
            };
            rows[m] += v;
            cols[n] += v;
        }
    }
    Ok((rows, cols))
}

/// Root-sum of squared block spectral norms over `partition`.
pub fn hs_sigma_on(x: &BlockMatrix, partition: &Partition) -> Result<f64> {
    let (rows, _) = group_row_col_sums(x, partition)?;
    Ok(rows.iter().sum::<f64>().sqrt())
}

pub fn hs_sigma(x: &BlockMatrix) -> f64 {
    hs_sigma_on(x, x.partition()).expect("own partition is compatible")
}

/// Largest singular value by power iteration on `X* X`.
pub fn op_norm(x: &CMatrix) -> f64 {
    let (r, c) = x.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let fro = x.norm();
    if fro == 0.0 {
        return 0.0;
    }
    if r == 1 || c == 1 {
        return fro;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    v /= Complex64::new(v.norm(), 0.0);
    let xa = x.adjoint();
    let mut last = 0.0f64;
    let max_iter = 10 * r.max(c);
    for _ in 0..max_iter {
        let y = x * &v;
        let est = y.norm();
        let w = &xa * y;
        let nw = w.norm();
        if nw == 0.0 {
            return est;
        }
        v = w / Complex64::new(nw, 0.0);
        if (est - last).abs() <= POWER_TOL * est {
            return est.max(last);
        }
        last = est;
    }
    last
}

pub fn norms(x: &BlockMatrix) -> NormReport {
    NormReport { hs: x.hs(), hs_sigma: hs_sigma(x), op: op_norm(x.dense()) }
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `(I + X)^{-1}` by LU, refusing near-singular shifts.
pub fn solve_shift(x: &BlockMatrix) -> Result<BlockMatrix> {
    let d = x.dim();
    let shifted = x.dense() + CMatrix::identity(d, d);
    let inv = shifted.clone().lu().try_inverse().ok_or(Error::NotInvertible { condition: f64::INFINITY })?;
    let condition = one_norm(&shifted) * one_norm(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::NotInvertible { condition });
    }
    let residual = gemm(&shifted, &inv) - CMatrix::identity(d, d);
    let fro = residual.norm();
    if fro > INVERSE_RESIDUAL && op_norm(&residual) > INVERSE_RESIDUAL {
        return Err(Error::NotInvertible { condition });
    }
    BlockMatrix::from_dense(x.partition(), inv)
}

/// 1-norm condition number of `I + X`, `None` when singular.
pub fn shift_condition(x: &BlockMatrix) -> Option<f64> {
    let d = x.dim();
    let shifted = x.dense() + CMatrix::identity(d, d);
    let inv = shifted.clone().lu().try_inverse()?;
    Some(one_norm(&shifted) * one_norm(&inv))
}
