use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmatrix::{hs_sigma_on, op_norm, BlockMatrix};
use crate::transforms::{apply_gamma, apply_j, TransformContext};
use crate::weighted::{weighted_norm, WeightSequence};

/// Norm in which a stage measures contraction.
#[derive(Debug, Clone)]
pub enum StageNorm {
    Hs,
    /// Root-sum of block spectral norms over the context partition.
    HsSigma,
    Operator,
    Weighted(Box<WeightSequence>),
}

impl StageNorm {
    pub fn name(&self) -> &'static str {
        match self {
            StageNorm::Hs => "hs",
            StageNorm::HsSigma => "hs_sigma",
            StageNorm::Operator => "op",
            StageNorm::Weighted(_) => "weighted",
        }
    }

    pub fn eval(&self, x: &BlockMatrix, ctx: &TransformContext) -> Result<f64> {
        match self {
            StageNorm::Hs => Ok(x.hs()),
            StageNorm::HsSigma => hs_sigma_on(x, ctx.partition()),
            StageNorm::Operator => Ok(op_norm(x.dense())),
            StageNorm::Weighted(w) => weighted_norm(x, w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    Full,
    /// Drops the `(Gamma X)(J B)` term; valid when `J B = 0`.
    ZeroDiagonal,
}

impl PhiVariant {
    /// Constant `c` in the certificate `c * gamma * ||B|| < 1`.
    pub fn certificate_factor(self) -> f64 {
        match self {
            PhiVariant::Full => 4.0,
            PhiVariant::ZeroDiagonal => 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    /// Bound on `||Gamma||` in the stage norm.
    pub gamma: f64,
    pub norm: StageNorm,
    pub variant: PhiVariant,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub x_star: BlockMatrix,
    pub iterations: usize,
    /// Largest measured ratio of successive differences.
    pub contraction_q: f64,
    pub certificate_q: f64,
    pub perturbation_norm: f64,
    /// `||X* - Bq|| / ||Bq||`; at most 3 inside the certified ball.
    pub ball_ratio: f64,
    /// `||Phi(X*) - X*|| / ||Bq||`.
    pub residual: f64,
    pub differences: Vec<f64>,
}

fn phi_terms(
    x: &BlockMatrix,
    bq: &BlockMatrix,
    jb: Option<&BlockMatrix>,
    ctx: &TransformContext,
) -> Result<BlockMatrix> {
    if !x.compatible(bq) {
        return Err(Error::mismatch("iterate and perturbation live on different partitions"));
    }
    let gx = apply_gamma(ctx, x)?;
    let bgx = bq * &gx;
    let jbgx = apply_j(ctx, &bgx)?;
    let mut out = &bgx - &(&gx * &jbgx);
    if let Some(jb) = jb {
        out = &out - &(&gx * jb);
    }
    Ok(&out + bq)
}

/// `Phi(X) = B Gamma X - (Gamma X)(J B) - (Gamma X) J(B Gamma X) + B`.
pub fn phi_step(x: &BlockMatrix, bq: &BlockMatrix, ctx: &TransformContext) -> Result<BlockMatrix> {
    let jb = apply_j(ctx, bq)?;
    phi_terms(x, bq, Some(&jb), ctx)
}

/// Three-term `Phi` for perturbations with vanishing block diagonal.
pub fn phi_step_zero_diag(x: &BlockMatrix, bq: &BlockMatrix, ctx: &TransformContext) -> Result<BlockMatrix> {
    let jb = apply_j(ctx, bq)?;
    if jb.hs() > 1e-12 * bq.hs().max(1.0) {
        return Err(Error::invalid(format!("J(B) has norm {:e}; three-term map needs J(B) = 0", jb.hs())));
    }
    phi_terms(x, bq, None, ctx)
}

/// Simple iteration `X_0 = 0, X_{j+1} = Phi(X_j)` under a contraction certificate.
pub fn fixed_point(
    bq: &BlockMatrix,
    ctx: &TransformContext,
    cert: &Certificate,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::invalid("tolerance must be positive and max_iter nonzero"));
    }
    let bnorm = cert.norm.eval(bq, ctx)?;
    let certificate_q = cert.variant.certificate_factor() * cert.gamma * bnorm;
    if !(certificate_q < 1.0) {
        return Err(Error::ContractionViolation { q: certificate_q });
    }
    let zero = BlockMatrix::zeros(bq.partition());
    if bnorm == 0.0 {
        return Ok(FixedPoint {
            x_star: zero,
            iterations: 1,
            contraction_q: 0.0,
            certificate_q,
            perturbation_norm: 0.0,
            ball_ratio: 0.0,
            residual: 0.0,
            differences: vec![0.0],
        });
    }
    let jb = match cert.variant {
        PhiVariant::Full => Some(apply_j(ctx, bq)?),
        PhiVariant::ZeroDiagonal => {
            let jb = apply_j(ctx, bq)?;
            if jb.hs() > 1e-12 * bq.hs().max(1.0) {
                return Err(Error::invalid("three-term map requested for a perturbation with J(B) != 0"));
            }
            None
        }
    };
    let mut x = zero;
    let mut differences = Vec::new();
    let mut contraction_q = 0.0f64;
    let mut last_ratio = f64::NAN;
    for it in 1..=max_iter {
        let next = phi_terms(&x, bq, jb.as_ref(), ctx)?;
        let diff = cert.norm.eval(&(&next - &x), ctx)?;
        if let Some(&prev) = differences.last() {
            if prev > 1e-10 * bnorm {
                last_ratio = diff / prev;
                contraction_q = contraction_q.max(last_ratio);
            }
        }
        differences.push(diff);
        x = next;
        if diff <= tol * bnorm {
            let after = phi_terms(&x, bq, jb.as_ref(), ctx)?;
            let residual = cert.norm.eval(&(&after - &x), ctx)? / bnorm;
            let ball_ratio = cert.norm.eval(&(&x - bq), ctx)? / bnorm;
            return Ok(FixedPoint {
                x_star: x,
                iterations: it,
                contraction_q,
                certificate_q,
                perturbation_norm: bnorm,
                ball_ratio,
                residual,
                differences,
            });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, last_ratio })
}
