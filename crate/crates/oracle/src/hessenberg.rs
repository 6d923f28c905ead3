use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{check_input, OracleError};

/// `A = Q H Q*` with `H` upper Hessenberg and `Q` unitary.
#[derive(Debug, Clone)]
pub struct Hessenberg {
    pub h: DMatrix<Complex64>,
    pub q: Option<DMatrix<Complex64>>,
}

/// Householder reduction to upper Hessenberg form.
pub fn hessenberg(a: &DMatrix<Complex64>, want_q: bool) -> Result<Hessenberg, OracleError> {
    check_input(a)?;
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = want_q.then(|| DMatrix::<Complex64>::identity(n, n));
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for i in 0..len {
            norm2 += h[(k + 1 + i, k)].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        for i in 0..len {
            v[i] = h[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..len].iter_mut() {
            *z /= vnorm;
        }

        // H <- (I - 2vv*) H on rows k+1..n
        for j in k..n {
            let mut s = zero;
            for i in 0..len {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            s *= 2.0;
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * s;
            }
        }
        // H <- H (I - 2vv*) on columns k+1..n
        for i in 0..n {
            let mut s = zero;
            for j in 0..len {
                s += h[(i, k + 1 + j)] * v[j];
            }
            s *= 2.0;
            for j in 0..len {
                h[(i, k + 1 + j)] -= s * v[j].conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let mut s = zero;
                for j in 0..len {
                    s += q[(i, k + 1 + j)] * v[j];
                }
                s *= 2.0;
                for j in 0..len {
                    q[(i, k + 1 + j)] -= s * v[j].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = zero;
        }
    }
    Ok(Hessenberg { h, q })
}
