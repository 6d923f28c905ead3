use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::partition::Partition;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

fn nonzeros(x: &CMatrix) -> usize {
    x.iter().filter(|z| **z != Complex64::new(0.0, 0.0)).count()
}

/// Complex product `a * b`; a sparse operand skips its zero entries.
pub fn gemm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k) = a.shape();
    assert_eq!(k, b.nrows(), "inner dimensions differ");
    let n = b.ncols();
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let zero = Complex64::new(0.0, 0.0);
    if nonzeros(b) * 8 <= k * n {
        for j in 0..n {
            for l in 0..k {
                let blj = b[(l, j)];
                if blj != zero {
                    for i in 0..m {
                        c[(i, j)] += a[(i, l)] * blj;
                    }
                }
            }
        }
        return c;
    }
    if nonzeros(a) * 8 <= m * k {
        for l in 0..k {
            for i in 0..m {
                let ail = a[(i, l)];
                if ail != zero {
                    for j in 0..n {
                        c[(i, j)] += ail * b[(l, j)];
                    }
                }
            }
        }
        return c;
    }
    // SAFETY: nalgebra stores dense matrices column-major and contiguous;
    // Complex64 is repr(C) with layout [re, im].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// A truncated operator viewed through a partition: block `(m, n)` is
/// `P_m X P_n` restricted to the group bases.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    partition: Arc<Partition>,
    data: CMatrix,
}

impl BlockMatrix {
    pub fn zeros(partition: &Arc<Partition>) -> Self {
        let d = partition.dim();
        BlockMatrix { partition: partition.clone(), data: CMatrix::zeros(d, d) }
    }

    pub fn identity(partition: &Arc<Partition>) -> Self {
        let d = partition.dim();
        BlockMatrix { partition: partition.clone(), data: CMatrix::identity(d, d) }
    }

    pub fn from_dense(partition: &Arc<Partition>, data: CMatrix) -> Result<Self> {
        let d = partition.dim();
        if data.shape() != (d, d) {
            return Err(Error::mismatch(format!("matrix is {:?}, partition dimension is {d}", data.shape())));
        }
        Ok(BlockMatrix { partition: partition.clone(), data })
    }

    pub fn from_diagonal(partition: &Arc<Partition>, diag: &[Complex64]) -> Result<Self> {
        let d = partition.dim();
        if diag.len() != d {
            return Err(Error::mismatch(format!("diagonal has {} entries, partition dimension is {d}", diag.len())));
        }
        let mut data = CMatrix::zeros(d, d);
        for (i, v) in diag.iter().enumerate() {
            data[(i, i)] = *v;
        }
        Ok(BlockMatrix { partition: partition.clone(), data })
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn dense(&self) -> &CMatrix {
        &self.data
    }

    pub fn dense_mut(&mut self) -> &mut CMatrix {
        &mut self.data
    }

    pub fn into_dense(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn block(&self, m: usize, n: usize) -> CMatrix {
        let rows = &self.partition.groups()[m].basis;
        let cols = &self.partition.groups()[n].basis;
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| self.data[(rows[i], cols[j])])
    }

    pub fn set_block(&mut self, m: usize, n: usize, block: &CMatrix) -> Result<()> {
        let rows = self.partition.groups()[m].basis.clone();
        let cols = self.partition.groups()[n].basis.clone();
        if block.shape() != (rows.len(), cols.len()) {
            return Err(Error::mismatch(format!(
                "block ({m},{n}) must be {}x{}, got {:?}",
                rows.len(),
                cols.len(),
                block.shape()
            )));
        }
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.data[(r, c)] = block[(i, j)];
            }
        }
        Ok(())
    }

    /// Group pairs whose block has a nonzero entry, row-major over groups.
    pub fn nonzero_blocks(&self) -> Vec<(usize, usize)> {
        let g = self.partition.len();
        let mut seen = vec![false; g * g];
        for j in 0..self.dim() {
            let gj = self.partition.group_of_basis(j);
            for i in 0..self.dim() {
                if self.data[(i, j)] != Complex64::new(0.0, 0.0) {
                    seen[self.partition.group_of_basis(i) * g + gj] = true;
                }
            }
        }
        (0..g * g).filter(|&k| seen[k]).map(|k| (k / g, k % g)).collect()
    }

    /// Same matrix on another partition of the same spectrum.
    pub fn regroup(&self, target: &Arc<Partition>) -> Result<Self> {
        if !self.partition.same_spectrum(target) {
            return Err(Error::mismatch("partitions belong to different spectra"));
        }
        Ok(BlockMatrix { partition: target.clone(), data: self.data.clone() })
    }

    /// Regroup onto a partition whose groups are unions of the current ones.
    pub fn coarsen(&self, target: &Arc<Partition>) -> Result<Self> {
        if !self.partition.refines(target) {
            return Err(Error::mismatch("target partition is not coarser than the source"));
        }
        self.regroup(target)
    }

    /// Regroup onto a partition that splits the current groups.
    pub fn refine(&self, target: &Arc<Partition>) -> Result<Self> {
        if !target.refines(&self.partition) {
            return Err(Error::mismatch("target partition is not finer than the source"));
        }
        self.regroup(target)
    }

    pub fn adjoint(&self) -> Self {
        BlockMatrix { partition: self.partition.clone(), data: self.data.adjoint() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        BlockMatrix { partition: self.partition.clone(), data: &self.data * s }
    }

    pub fn compatible(&self, other: &BlockMatrix) -> bool {
        Arc::ptr_eq(&self.partition, &other.partition) || *self.partition == *other.partition
    }

    fn expect_compatible(&self, other: &BlockMatrix) {
        assert!(self.compatible(other), "block matrices live on different partitions");
    }

    pub fn try_matmul(&self, other: &BlockMatrix) -> Result<Self> {
        if !self.compatible(other) {
            return Err(Error::mismatch("product of matrices on different partitions"));
        }
        Ok(BlockMatrix { partition: self.partition.clone(), data: gemm(&self.data, &other.data) })
    }

    /// Scale row `i` by `left[i]` and column `j` by `right[j]`.
    pub fn scale_rows_cols(&self, left: Option<&[f64]>, right: Option<&[f64]>) -> Self {
        let mut data = self.data.clone();
        let d = self.dim();
        for j in 0..d {
            let cj = right.map_or(1.0, |r| r[j]);
            for i in 0..d {
                let ri = left.map_or(1.0, |l| l[i]);
                data[(i, j)] *= ri * cj;
            }
        }
        BlockMatrix { partition: self.partition.clone(), data }
    }

    /// Frobenius norm of the whole truncation.
    pub fn hs(&self) -> f64 {
        self.data.norm()
    }
}

impl Add for &BlockMatrix {
    type Output = BlockMatrix;
    fn add(self, rhs: &BlockMatrix) -> BlockMatrix {
        self.expect_compatible(rhs);
        BlockMatrix { partition: self.partition.clone(), data: &self.data + &rhs.data }
    }
}

impl Sub for &BlockMatrix {
    type Output = BlockMatrix;
    fn sub(self, rhs: &BlockMatrix) -> BlockMatrix {
        self.expect_compatible(rhs);
        BlockMatrix { partition: self.partition.clone(), data: &self.data - &rhs.data }
    }
}

impl Mul for &BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, rhs: &BlockMatrix) -> BlockMatrix {
        self.expect_compatible(rhs);
        BlockMatrix { partition: self.partition.clone(), data: gemm(&self.data, &rhs.data) }
    }
}

impl Mul<Complex64> for &BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, rhs: Complex64) -> BlockMatrix {
        self.scale(rhs)
    }
}

impl Neg for &BlockMatrix {
    type Output = BlockMatrix;
    fn neg(self) -> BlockMatrix {
        BlockMatrix { partition: self.partition.clone(), data: -&self.data }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<BlockMatrix> for BlockMatrix {
            type Output = BlockMatrix;
            fn $f(self, rhs: BlockMatrix) -> BlockMatrix {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&BlockMatrix> for BlockMatrix {
            type Output = BlockMatrix;
            fn $f(self, rhs: &BlockMatrix) -> BlockMatrix {
                (&self).$f(rhs)
            }
        }
        impl $tr<BlockMatrix> for &BlockMatrix {
            type Output = BlockMatrix;
            fn $f(self, rhs: BlockMatrix) -> BlockMatrix {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
