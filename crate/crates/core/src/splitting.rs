//! Isolating one simple eigenvalue: the two-part system, the vector map
//! `Psi` and the eigenpair bounds it certifies.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmatrix::{block_norm, gemm, BlockMatrix, CMatrix, Partition, Spectrum};
use crate::similarity::{fixed_point, Certificate, PhiVariant, Problem, StageNorm};
use crate::transforms::{apply_j, TransformContext};

pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn basis_of(spec: &Spectrum, k: i64) -> Result<usize> {
    let pos = spec.position(k).ok_or_else(|| Error::invalid(format!("index {k} is outside the window")))?;
    if spec.entries()[pos].multiplicity != 1 {
        return Err(Error::NotSupported(format!("eigenvalue at index {k} is not simple")));
    }
    Ok(spec.basis_range(pos).start)
}

/// Diagonal of `S`: `1/(lambda_k - lambda_j)` off `k`, zero at `k`.
pub fn s_diagonal(spec: &Spectrum, k: i64) -> Result<Vec<Complex64>> {
    let i = basis_of(spec, k)?;
    let lambda = spec.basis_values();
    Ok((0..spec.dim()).map(|j| if j == i { ZERO } else { 1.0 / (lambda[i] - lambda[j]) }).collect())
}

/// The reduced resolvent `S` at `lambda_k` on the trivial partition.
pub fn s_operator(spec: &Arc<Spectrum>, k: i64) -> Result<BlockMatrix> {
    let p = Arc::new(Partition::trivial(spec));
    BlockMatrix::from_diagonal(&p, &s_diagonal(spec, k)?)
}

/// `||S||`, the reciprocal distance from `lambda_k` to the rest of the spectrum.
pub fn s_norm(spec: &Spectrum, k: i64) -> Result<f64> {
    Ok(s_diagonal(spec, k)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Rank-one projection onto the eigenvector of `lambda_k`.
pub fn eigen_projection(spec: &Arc<Spectrum>, k: i64) -> Result<BlockMatrix> {
    let i = basis_of(spec, k)?;
    let p = Arc::new(Partition::trivial(spec));
    let mut out = BlockMatrix::zeros(&p);
    out.dense_mut()[(i, i)] = Complex64::new(1.0, 0.0);
    Ok(out)
}

/// `Gamma X = P X S - S X P`.
pub fn gamma_via_s(x: &BlockMatrix, s: &BlockMatrix, p: &BlockMatrix) -> BlockMatrix {
    &(&(p * x) * s) - &(&(s * x) * p)
}

/// Keep rows in (`true`) or out of the isolated index, likewise columns.
fn mask(x: &CMatrix, i: usize, rows_in: bool, cols_in: bool) -> CMatrix {
    CMatrix::from_fn(
        x.nrows(),
        x.ncols(),
        |r, c| if (r == i) == rows_in && (c == i) == cols_in { x[(r, c)] } else { ZERO },
    )
}

#[derive(Debug, Clone)]
pub struct SplitSystem {
    pub x_star: BlockMatrix,
    /// `X11 + X22`.
    pub v: BlockMatrix,
    pub iterations: usize,
    pub contraction_q: f64,
    pub certificate_q: f64,
    /// Residuals of the four block equations, in the order 11, 21, 12, 22.
    pub equation_residuals: [f64; 4],
}

/// Two-part similarity for `{lambda_k}` and its complement, in operator norm
/// with `||Gamma|| <= s sqrt(2)`.
pub fn split_system_solve(
    spec: &Arc<Spectrum>,
    b: &BlockMatrix,
    k: i64,
    tol: f64,
    max_iter: usize,
) -> Result<SplitSystem> {
    let ctx = TransformContext::two_part(spec, k)?;
    let s = s_norm(spec, k)?;
    let cert =
        Certificate { gamma: s * std::f64::consts::SQRT_2, norm: StageNorm::Operator, variant: PhiVariant::Full };
    let bq = b.regroup(ctx.partition())?;
    let fp = fixed_point(&bq, &ctx, &cert, tol, max_iter)?;
    let v = apply_j(&ctx, &fp.x_star)?;
    let i = basis_of(spec, k)?;
    let smat = CMatrix::from_diagonal(&DVector::from_vec(s_diagonal(spec, k)?));
    let x = fp.x_star.dense();
    let bd = b.dense();
    let part = |m: &CMatrix, r: bool, c: bool| mask(m, i, r, c);
    let (x11, x12, x21, x22) = (part(x, true, true), part(x, true, false), part(x, false, true), part(x, false, false));
    let (b11, b12, b21, b22) =
        (part(bd, true, true), part(bd, true, false), part(bd, false, true), part(bd, false, false));
    let sx21 = gemm(&smat, &x21);
    let x12s = gemm(&x12, &smat);
    let r11 = &x11 + gemm(&b12, &sx21) - &b11;
    let r21 = &x21 + gemm(&b22, &sx21) - gemm(&sx21, &b11) + gemm(&gemm(&sx21, &b12), &sx21) - &b21;
    let r12 = &x12 - gemm(&b11, &x12s) + gemm(&x12s, &b22) + gemm(&gemm(&x12s, &b21), &x12s) - &b12;
    let r22 = &x22 - gemm(&b21, &x12s) - &b22;
    Ok(SplitSystem {
        v: v.regroup(b.partition())?,
        x_star: fp.x_star.regroup(b.partition())?,
        iterations: fp.iterations,
        contraction_q: fp.contraction_q,
        certificate_q: fp.certificate_q,
        equation_residuals: [r11.norm(), r21.norm(), r12.norm(), r22.norm()],
    })
}

/// Constants and bounds of the eigenpair certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mt6Certificate {
    /// `||b1 S - B22 S||`.
    pub m: f64,
    /// `s ||B12 S|| ||B21||`.
    pub n: f64,
    pub s: f64,
    pub b12s: f64,
    pub b21: f64,
    /// `m + 2 sqrt(n)`, which must stay below 1.
    pub lhs: f64,
    pub ok: bool,
    /// Smaller root of `n t^2 + (m - 1) t + 1`.
    pub r: Option<f64>,
    pub bound_e: Option<f64>,
    pub bound_b2: Option<f64>,
    /// Two-term expansions `r ~ (1 + n/(1-m)^2)/(1-m)` of the same bounds.
    pub bound_e_series: Option<f64>,
    pub bound_b2_series: Option<f64>,
}

/// Bounds from the four scalar constants.
pub fn certificate_from_constants(m: f64, s: f64, b12s: f64, b21: f64) -> Mt6Certificate {
    let n = s * b12s * b21;
    let lhs = m + 2.0 * n.sqrt();
    let ok = lhs < 1.0 && m >= 0.0 && n >= 0.0;
    let (mut r, mut be, mut bb, mut bes, mut bbs) = (None, None, None, None, None);
    if ok {
        let a = 1.0 - m;
        let root = 2.0 / (a + (a * a - 4.0 * n).max(0.0).sqrt());
        let series = (1.0 + n / (a * a)) / a;
        r = Some(root);
        be = Some(s * root * b21);
        bb = Some(root * b12s * b21);
        bes = Some(s * series * b21);
        bbs = Some(series * b12s * b21);
    }
    Mt6Certificate {
        m,
        n,
        s,
        b12s,
        b21,
        lhs,
        ok,
        r,
        bound_e: be,
        bound_b2: bb,
        bound_e_series: bes,
        bound_b2_series: bbs,
    }
}

/// Constants measured on the window. Norms come from full SVDs.
pub fn mt6_certificate(spec: &Spectrum, b: &BlockMatrix, k: i64) -> Result<Mt6Certificate> {
    let i = basis_of(spec, k)?;
    let sd = s_diagonal(spec, k)?;
    let s = sd.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let bd = b.dense();
    let b1 = bd[(i, i)];
    let d = spec.dim();
    let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
    let mmat = CMatrix::from_fn(others.len(), others.len(), |r, c| {
        let (p, q) = (others[r], others[c]);
        let diag = if p == q { b1 } else { ZERO };
        (diag - bd[(p, q)]) * sd[q]
    });
    let m = block_norm(&mmat);
    let b12s = others.iter().map(|&j| (bd[(i, j)] * sd[j]).norm_sqr()).sum::<f64>().sqrt();
    let b21 = others.iter().map(|&j| bd[(j, i)].norm_sqr()).sum::<f64>().sqrt();
    Ok(certificate_from_constants(m, s, b12s, b21))
}

#[derive(Debug, Clone)]
pub struct PsiFixedPoint {
    pub y: CVector,
    pub iterations: usize,
    /// Largest `||y_j||` along the iteration.
    pub max_norm: f64,
}

/// `Psi(z) = b1 S z - B22 S z - <B12 S z, e> S z + B21 e` iterated from zero.
pub fn psi_fixed_point(spec: &Spectrum, b: &BlockMatrix, k: i64, tol: f64, max_iter: usize) -> Result<PsiFixedPoint> {
    let cert = mt6_certificate(spec, b, k)?;
    if cert.lhs == 1.0 {
        return Err(Error::NotSupported("m + 2 sqrt(n) = 1 exactly; only the strict case is iterated".into()));
    }
    if !cert.ok {
        return Err(Error::ConditionViolation { lhs: cert.lhs, rhs: 1.0 });
    }
    let i = basis_of(spec, k)?;
    let sd = CVector::from_vec(s_diagonal(spec, k)?);
    let bd = b.dense();
    let b1 = bd[(i, i)];
    let mut b21e = bd.column(i).into_owned();
    b21e[i] = ZERO;
    let scale = b21e.norm();
    let mut y = CVector::zeros(spec.dim());
    if scale == 0.0 {
        return Ok(PsiFixedPoint { y, iterations: 0, max_norm: 0.0 });
    }
    let mut max_norm = 0.0f64;
    for it in 1..=max_iter {
        let w = sd.component_mul(&y);
        let bw = bd * &w;
        let c = bw[i];
        let mut next = &w * (b1 - c) - &bw + &b21e;
        next[i] = ZERO;
        let step = (&next - &y).norm();
        y = next;
        max_norm = max_norm.max(y.norm());
        if step <= tol * scale {
            return Ok(PsiFixedPoint { y, iterations: it, max_norm });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, last_ratio: f64::NAN })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingResult {
    pub k: i64,
    pub lambda: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    #[serde(skip)]
    pub y: CVector,
    pub lambda_prime: Complex64,
    #[serde(skip)]
    pub e_prime: CVector,
    pub certificate: Mt6Certificate,
    pub r: f64,
    pub bound_e: f64,
    pub bound_b2: f64,
    pub condvec_ok: bool,
    pub iterations: usize,
    pub e_shift: f64,
    pub y_norm: f64,
    pub max_iterate_norm: f64,
    /// `||(A-B)e' - lambda' e'|| / (||A-B|| ||e'||)`.
    pub eigen_residual: f64,
}

/// Isolate `lambda_k` and return the perturbed eigenpair with its bounds.
pub fn split(problem: &Problem, k: i64, tol: f64, max_iter: usize) -> Result<SplittingResult> {
    let spec = problem.spectrum();
    let b = problem.perturbation();
    let cert = mt6_certificate(spec, b, k)?;
    let psi = psi_fixed_point(spec, b, k, tol, max_iter)?;
    let i = basis_of(spec, k)?;
    let sd = CVector::from_vec(s_diagonal(spec, k)?);
    let bd = b.dense();
    let sy = sd.component_mul(&psi.y);
    let b1 = bd[(i, i)];
    let b2 = (bd * &sy)[i];
    let lambda = spec.basis_values()[i];
    let lambda_prime = lambda - b1 + b2;
    let mut e_prime = -sy;
    e_prime[i] += Complex64::new(1.0, 0.0);
    let m = problem.assembled();
    let res = (&m * &e_prime - &e_prime * lambda_prime).norm();
    let scale = block_norm(&m) * e_prime.norm();
    let e_shift = (&e_prime - {
        let mut e = CVector::zeros(spec.dim());
        e[i] = Complex64::new(1.0, 0.0);
        e
    })
    .norm();
    Ok(SplittingResult {
        k,
        lambda,
        b1,
        b2,
        lambda_prime,
        certificate: cert,
        r: cert.r.expect("certificate holds"),
        bound_e: cert.bound_e.expect("certificate holds"),
        bound_b2: cert.bound_b2.expect("certificate holds"),
        condvec_ok: cert.ok,
        iterations: psi.iterations,
        e_shift,
        y_norm: psi.y.norm(),
        max_iterate_norm: psi.max_norm,
        eigen_residual: if scale > 0.0 { res / scale } else { res },
        y: psi.y,
        e_prime,
    })
}
