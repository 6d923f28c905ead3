use std::sync::Arc;

use crate::error::{Error, Result};
use crate::opmatrix::{op_norm, solve_shift, BlockMatrix, Spectrum};
use crate::transforms::{apply_gamma, apply_j, TransformContext};

use super::residual::similarity_defect;

/// First-stage similarity `I + Gamma_m B` and the remainder it leaves.
#[derive(Debug, Clone)]
pub struct PreliminaryTransform {
    pub m: usize,
    pub jm_b: BlockMatrix,
    pub b0: BlockMatrix,
    pub gamma_b: BlockMatrix,
    pub gamma_b_op: f64,
    /// `||(A-B)(I+G) - (I+G)(A - J_m B - B0)||_hs / (||A|| + ||B||_hs)`.
    pub identity_residual: f64,
}

pub fn preliminary_transform(b: &BlockMatrix, ctx_m: &TransformContext) -> Result<PreliminaryTransform> {
    let m = match ctx_m.partition().kind() {
        crate::opmatrix::PartitionKind::Coarse { m } => m,
        crate::opmatrix::PartitionKind::Trivial => 0,
        _ => return Err(Error::invalid("preliminary transform needs a coarse partition")),
    };
    let gamma_b = apply_gamma(ctx_m, b)?;
    let gamma_b_op = op_norm(gamma_b.dense());
    if !(gamma_b_op < 1.0) {
        return Err(Error::ContractionViolation { q: gamma_b_op });
    }
    let jm_b = apply_j(ctx_m, b)?;
    let inv = solve_shift(&gamma_b)?;
    let inner = &(b * &gamma_b) - &(&gamma_b * &jm_b);
    let b0 = &inv * &inner;
    let v = &jm_b + &b0;
    let defect = similarity_defect(ctx_m.spectrum(), b, &gamma_b, &v)?;
    let scale = ctx_m.spectrum().max_modulus() + b.hs();
    let identity_residual = if scale > 0.0 { defect.norm() / scale } else { 0.0 };
    Ok(PreliminaryTransform { m, jm_b, b0, gamma_b, gamma_b_op, identity_residual })
}

/// Smallest `m <= max_m` with `||Gamma_m B||_op < 1`.
pub fn select_preliminary(b: &BlockMatrix, spectrum: &Arc<Spectrum>, max_m: usize) -> Result<PreliminaryTransform> {
    let mut best = f64::INFINITY;
    for m in 0..=max_m {
        let ctx = TransformContext::coarse(spectrum, m);
        let bm = b.regroup(&Arc::new(crate::opmatrix::Partition::trivial(spectrum)))?;
        match preliminary_transform(&bm, &ctx) {
            Ok(pt) => return Ok(pt),
            Err(Error::ContractionViolation { q }) => best = best.min(q),
            Err(e) => return Err(e),
        }
    }
    Err(Error::WindowTooSmall { what: "preliminary m with ||Gamma_m B|| < 1", best })
}
