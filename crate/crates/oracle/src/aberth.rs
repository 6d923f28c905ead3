use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{check_input, OracleError};

const MAX_STEPS: usize = 1000;

/// `f(z)/f'(z)` for `f(z) = det(M - zI)`, via `f'/f = -tr((M - zI)^{-1})`.
///
/// Returns zero when `M - zI` is exactly singular (z is a root).
fn newton_ratio(m: &DMatrix<Complex64>, z: Complex64) -> Complex64 {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= z;
    }
    // LU with partial pivoting, in place
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].norm();
        for i in (k + 1)..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap_rows(p, k);
            perm.swap(p, k);
        }
        let pivot = a[(k, k)];
        for i in (k + 1)..n {
            let f = a[(i, k)] / pivot;
            a[(i, k)] = f;
            for j in (k + 1)..n {
                let t = a[(k, j)];
                a[(i, j)] -= f * t;
            }
        }
    }
    // trace of the inverse: solve for each unit vector, keep the diagonal entry
    let mut trace = Complex64::new(0.0, 0.0);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        for i in 0..n {
            x[i] = if perm[i] == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        }
        for i in 0..n {
            for j in 0..i {
                let t = a[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let t = a[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= a[(i, i)];
        }
        trace += x[col];
    }
    if trace.norm() == 0.0 || !trace.re.is_finite() || !trace.im.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    -Complex64::new(1.0, 0.0) / trace
}

/// Eigenvalues as the roots of `det(M - zI)`, found by Aberth–Ehrlich
/// simultaneous iteration. Intended for very small matrices only.
pub fn determinant_roots(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>, OracleError> {
    check_input(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let centre = m.trace() / n as f64;
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= centre;
    }
    let radius = shifted.norm().max(1e-300);
    let scale = m.norm().max(1.0);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 0.4 + std::f64::consts::TAU * k as f64 / n as f64;
            centre + Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_STEPS {
        let mut worst = 0.0f64;
        for k in 0..n {
            let ratio = newton_ratio(m, z[k]);
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 0.0 {
                        repulsion += Complex64::new(1.0, 0.0) / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            z[k] -= step;
            worst = worst.max(step.norm());
        }
        if worst <= 1e-15 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::RootsNoConvergence { iterations: MAX_STEPS });
    }
    for zk in z.iter_mut() {
        for _ in 0..2 {
            let step = newton_ratio(m, *zk);
            if step.norm() <= 1e-12 * scale {
                *zk -= step;
            }
        }
    }
    Ok(z)
}
