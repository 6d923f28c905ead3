use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::hessenberg::hessenberg;
use crate::OracleError;

const DEFLATION_TOL: f64 = 1e-14;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 100;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let e1 = mid + disc;
    let e2 = mid - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying `h`.
fn hessenberg_qr(h: &mut DMatrix<Complex64>) -> Result<Vec<Complex64>, OracleError> {
    let n = h.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    if n == 0 {
        return Ok(eig);
    }
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(l, l - 1)].norm() <= DEFLATION_TOL * s {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(OracleError::NoConvergence { index: hi, iterations: sweeps - 1 });
        }
        let shift = if sweeps.is_multiple_of(11) {
            let mut s = h[(hi, hi - 1)].re.abs();
            if hi >= 2 {
                s += h[(hi - 1, hi - 2)].re.abs();
            }
            h[(hi, hi)] + Complex64::new(s, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..hi {
            let (x, y) = if k == l { (h[(l, l)] - shift, h[(l + 1, l)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
            let (c, s) = givens(x, y);
            let first = if k == l { l } else { k - 1 };
            for j in first..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
            let last = (k + 2).min(hi);
            for i in l..=last {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    eig[0] = h[(0, 0)];
    Ok(eig)
}

/// Eigenvalues of a dense complex matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>, OracleError> {
    let mut h = hessenberg(m, false)?.h;
    hessenberg_qr(&mut h)
}

/// Solve `(H - mu I) x = b` for Hessenberg `H` by elimination with
/// adjacent-row pivoting.
fn hessenberg_solve(h: &DMatrix<Complex64>, mu: Complex64, b: &mut [Complex64]) {
    let n = h.nrows();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] -= mu;
    }
    let tiny = h.norm().max(1.0) * 1e-18;
    for k in 0..n.saturating_sub(1) {
        if a[(k + 1, k)].norm() > a[(k, k)].norm() {
            for j in k..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(k + 1, j)];
                a[(k + 1, j)] = t;
            }
            b.swap(k, k + 1);
        }
        if a[(k, k)].norm() < tiny {
            a[(k, k)] = Complex64::new(tiny, 0.0);
        }
        let f = a[(k + 1, k)] / a[(k, k)];
        if f.norm() != 0.0 {
            for j in k..n {
                let t = a[(k, j)];
                a[(k + 1, j)] -= f * t;
            }
            let t = b[k];
            b[k + 1] -= f * t;
        }
    }
    if a[(n - 1, n - 1)].norm() < tiny {
        a[(n - 1, n - 1)] = Complex64::new(tiny, 0.0);
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[(i, j)] * b[j];
        }
        b[i] = s / a[(i, i)];
    }
}

/// Eigenvalues and unit eigenvectors. Vectors come from inverse iteration
/// on the Hessenberg form, mapped back through the reduction.
pub fn eigen(m: &DMatrix<Complex64>) -> Result<EigenDecomposition, OracleError> {
    let red = hessenberg(m, true)?;
    let mut work = red.h.clone();
    let values = hessenberg_qr(&mut work)?;
    let n = m.nrows();
    let q = red.q.expect("requested");
    let scale = m.norm().max(1.0);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, &lambda) in values.iter().enumerate() {
        let mu = lambda + Complex64::new(1.0, 0.7) * (scale * 1e-13);
        let mut x: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + 0.1 * (i % 7) as f64, 0.05 * (i % 3) as f64)).collect();
        for _ in 0..3 {
            hessenberg_solve(&red.h, mu, &mut x);
            let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in x.iter_mut() {
                *z /= nx;
            }
        }
        let v = &q * DVector::from_vec(x);
        let nv = v.norm();
        vectors.set_column(col, &(v / Complex64::new(nv, 0.0)));
    }
    Ok(EigenDecomposition { values, vectors })
}
