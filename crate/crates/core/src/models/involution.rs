use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::coefficients::{coefficient, Coefficients};
use crate::error::Result;
use crate::opmatrix::{BlockMatrix, CMatrix, Partition, Spectrum};

/// Fourier coefficient of `e^{2 pi i theta t}` at frequency `l`:
/// `c(x) = (1 - e^{-2 pi i x}) / (2 pi i x)` with `x = l - theta`.
pub fn phase_coefficient(l: i64, theta: f64) -> Complex64 {
    let x = l as f64 - theta;
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * x);
    num / Complex64::new(0.0, 2.0 * PI * x)
}

/// Coefficients of `v e^{2 pi i theta t}` at `k`, exact for finitely supported `v`.
pub fn tilde_coefficient(v_hat: &Coefficients, theta: f64, k: i64) -> Complex64 {
    if theta.fract() == 0.0 {
        return coefficient(v_hat, k - theta as i64);
    }
    v_hat.iter().map(|(&j, &z)| z * phase_coefficient(k - j, theta)).sum()
}

/// Entry `(m, n)` is `e^{-i pi theta} v~(m + n)`.
pub fn build_involution_perturbation(
    spectrum: &Arc<Spectrum>,
    v_hat: &Coefficients,
    theta: f64,
) -> Result<BlockMatrix> {
    super::check_theta(theta, 0.0, 2.0, true)?;
    let n = spectrum.window().half_width() as i64;
    let phase = Complex64::from_polar(1.0, -PI * theta);
    let table: Vec<Complex64> = (-2 * n..=2 * n).map(|k| phase * tilde_coefficient(v_hat, theta, k)).collect();
    let d = spectrum.dim();
    let data = CMatrix::from_fn(d, d, |i, j| {
        let s = spectrum.label_of_basis(i) + spectrum.label_of_basis(j);
        table[(s + 2 * n) as usize]
    });
    BlockMatrix::from_dense(&Arc::new(Partition::trivial(spectrum)), data)
}

/// `(1/4 pi^2) sum_{m,n} |sum_{l != n} v(l+m) v(l+n) / (l - n)|^2` over the window.
pub fn involution_inequality_lhs(v_hat: &Coefficients, half_width: i64) -> f64 {
    let r = super::coefficients::support_radius(v_hat);
    let mut total = 0.0;
    for m in -half_width..=half_width {
        for n in -half_width..=half_width {
            let lo = (-r - m).max(-r - n);
            let hi = (r - m).min(r - n);
            let mut s = Complex64::default();
            for l in lo..=hi {
                if l != n {
                    s += coefficient(v_hat, l + m) * coefficient(v_hat, l + n) / (l - n) as f64;
                }
            }
            total += s.norm_sqr();
        }
    }
    total / (4.0 * PI * PI)
}

/// Displayed `p_n = e^{-i pi theta} v~(2n)`.
pub fn involution_p(v_hat: &Coefficients, theta: f64, n: i64) -> Complex64 {
    Complex64::from_polar(1.0, -PI * theta) * tilde_coefficient(v_hat, theta, 2 * n)
}

/// Displayed `q_n`, with the sum over `l` restricted to `ells`.
pub fn involution_q(v_hat: &Coefficients, theta: f64, n: i64, ells: impl Iterator<Item = i64>) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -2.0 * PI * theta);
    ells.filter(|&l| l != n)
        .map(|l| {
            let t = tilde_coefficient(v_hat, theta, l + n);
            phase * t * t / Complex64::new(0.0, 2.0 * PI * (l - n) as f64)
        })
        .sum()
}
