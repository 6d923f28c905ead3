//! The block-diagonal projection `J` and the commutator inverse `Gamma`,
//! plain and relative to a coarse partition.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opmatrix::{eta_constant, separation_delta, BlockMatrix, Partition, Spectrum};

/// The pair (free operator, partition) that fixes `J_Sigma` and `Gamma_Sigma`.
#[derive(Debug, Clone)]
pub struct TransformContext {
    spectrum: Arc<Spectrum>,
    partition: Arc<Partition>,
}

impl TransformContext {
    pub fn new(spectrum: Arc<Spectrum>, partition: Arc<Partition>) -> Result<Self> {
        if partition.entry_dims() != spectrum.multiplicities().as_slice() {
            return Err(Error::mismatch("partition was not built on this spectrum"));
        }
        Ok(TransformContext { spectrum, partition })
    }

    pub fn trivial(spectrum: &Arc<Spectrum>) -> Self {
        let p = Arc::new(Partition::trivial(spectrum));
        TransformContext { spectrum: spectrum.clone(), partition: p }
    }

    pub fn coarse(spectrum: &Arc<Spectrum>, m: usize) -> Self {
        let p = Arc::new(Partition::coarse(spectrum, m));
        TransformContext { spectrum: spectrum.clone(), partition: p }
    }

    pub fn two_part(spectrum: &Arc<Spectrum>, k: i64) -> Result<Self> {
        let p = Arc::new(Partition::two_part(spectrum, k)?);
        Ok(TransformContext { spectrum: spectrum.clone(), partition: p })
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    fn check(&self, x: &BlockMatrix) -> Result<()> {
        if !x.partition().refines(&self.partition) {
            return Err(Error::mismatch("matrix partition does not refine the transform partition"));
        }
        Ok(())
    }

    /// `A` as a block matrix on `partition`.
    pub fn free_operator(&self, partition: &Arc<Partition>) -> Result<BlockMatrix> {
        BlockMatrix::from_diagonal(partition, self.spectrum.basis_values())
    }
}

/// Keep the blocks on the diagonal of the context partition.
pub fn apply_j(ctx: &TransformContext, x: &BlockMatrix) -> Result<BlockMatrix> {
    ctx.check(x)?;
    let groups = ctx.partition.basis_groups();
    let mut out = x.clone();
    let data = out.dense_mut();
    let zero = Complex64::new(0.0, 0.0);
    for j in 0..data.ncols() {
        for i in 0..data.nrows() {
            if groups[i] != groups[j] {
                data[(i, j)] = zero;
            }
        }
    }
    Ok(out)
}

/// Divide cross-group entries by `lambda_i - lambda_j`; zero within groups.
pub fn apply_gamma(ctx: &TransformContext, x: &BlockMatrix) -> Result<BlockMatrix> {
    ctx.check(x)?;
    let groups = ctx.partition.basis_groups();
    let lambda = ctx.spectrum.basis_values();
    let mut out = x.clone();
    let data = out.dense_mut();
    let zero = Complex64::new(0.0, 0.0);
    for j in 0..data.ncols() {
        for i in 0..data.nrows() {
            data[(i, j)] = if groups[i] != groups[j] { data[(i, j)] / (lambda[i] - lambda[j]) } else { zero };
        }
    }
    Ok(out)
}

/// `Gamma` at the eigenvalue level: every pair with distinct eigenvalues.
pub fn apply_gamma_entrywise(spectrum: &Spectrum, x: &BlockMatrix) -> Result<BlockMatrix> {
    if x.partition().entry_dims() != spectrum.multiplicities().as_slice() {
        return Err(Error::mismatch("matrix was not built on this spectrum"));
    }
    let lambda = spectrum.basis_values();
    let mut out = x.clone();
    let data = out.dense_mut();
    for j in 0..data.ncols() {
        for i in 0..data.nrows() {
            let d = lambda[i] - lambda[j];
            data[(i, j)] = if d != Complex64::new(0.0, 0.0) { data[(i, j)] / d } else { Complex64::new(0.0, 0.0) };
        }
    }
    Ok(out)
}

/// Reference evaluation `Gamma(X - J_Sigma X)`.
pub fn gamma_sigma_reference(ctx: &TransformContext, x: &BlockMatrix) -> Result<BlockMatrix> {
    let jx = apply_j(ctx, x)?;
    apply_gamma_entrywise(&ctx.spectrum, &(x - &jx))
}

/// `|| A (Gamma X) - (Gamma X) A - (X - J X) ||_hs`.
pub fn commutator_residual(ctx: &TransformContext, x: &BlockMatrix) -> Result<f64> {
    let g = apply_gamma(ctx, x)?;
    let jx = apply_j(ctx, x)?;
    let lambda = ctx.spectrum.basis_values();
    let gd = g.dense();
    let xd = x.dense();
    let jd = jx.dense();
    let mut s = 0.0;
    for j in 0..gd.ncols() {
        for i in 0..gd.nrows() {
            let lhs = lambda[i] * gd[(i, j)] - gd[(i, j)] * lambda[j];
            s += (lhs - (xd[(i, j)] - jd[(i, j)])).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// `d_{j l} = (sup_{lambda in sigma_l} sum_{mu in sigma_j} |mu - lambda|^{-2})^{1/2}`.
pub fn coupling_d(ctx: &TransformContext, j: usize, l: usize) -> Result<f64> {
    if j == l {
        return Err(Error::invalid("coupling constant needs two different groups"));
    }
    let groups = ctx.partition.groups();
    let (gj, gl) = match (groups.get(j), groups.get(l)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::invalid("group index outside partition")),
    };
    let entries = ctx.spectrum.entries();
    let mut best = 0.0f64;
    for &pl in &gl.entries {
        let lam = entries[pl].value;
        let s: f64 = gj.entries.iter().map(|&pj| 1.0 / (entries[pj].value - lam).norm_sqr()).sum();
        best = best.max(s);
    }
    Ok(best.sqrt())
}

/// `(sqrt(eta), 1/delta)`, the operator-norm and Hilbert–Schmidt bounds for `Gamma`.
pub fn gamma_norm_certificates(ctx: &TransformContext) -> Result<(f64, f64)> {
    Ok((eta_constant(&ctx.spectrum)?.sqrt(), 1.0 / separation_delta(&ctx.spectrum)?))
}
