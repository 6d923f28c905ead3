use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::coefficients::{coefficient, Coefficients};
use crate::error::Result;
use crate::opmatrix::{BlockMatrix, CMatrix, Partition, Spectrum, TruncationWindow};

/// `lambda_n = (pi (2n - theta))^2`, `theta` in `(0, 1)`.
pub fn build_hill_spectrum(theta: f64, window: TruncationWindow) -> Result<Spectrum> {
    super::check_theta(theta, 0.0, 1.0, false)?;
    Spectrum::from_fn(window, 1, |n| {
        let x = PI * (2 * n) as f64 - PI * theta;
        Complex64::new(x * x, 0.0)
    })
}

/// Entry `(m, n)` is `v(m - n)`.
pub fn build_hill(theta: f64, v_hat: &Coefficients, window: TruncationWindow) -> Result<(Spectrum, BlockMatrix)> {
    let spectrum = Arc::new(build_hill_spectrum(theta, window)?);
    let d = spectrum.dim();
    let data =
        CMatrix::from_fn(d, d, |i, j| coefficient(v_hat, spectrum.label_of_basis(i) - spectrum.label_of_basis(j)));
    let b = BlockMatrix::from_dense(&Arc::new(Partition::trivial(&spectrum)), data)?;
    Ok((Arc::try_unwrap(spectrum).unwrap_or_else(|s| (*s).clone()), b))
}

/// `q_n` with the `(n - l)` orientation: `(1/4 pi^2) sum v(l-n) v(n-l) / ((n-l)(n+l-theta))`.
pub fn hill_q_display(v_hat: &Coefficients, theta: f64, n: i64, ells: impl Iterator<Item = i64>) -> Complex64 {
    let s: Complex64 = ells
        .filter(|&l| l != n)
        .map(|l| coefficient(v_hat, l - n) * coefficient(v_hat, n - l) / ((n - l) as f64 * ((n + l) as f64 - theta)))
        .sum();
    s / (4.0 * PI * PI)
}

/// `q_n` from `sum_l B_{nl} B_{ln} / (lambda_l - lambda_n)`:
/// `(1/4 pi^2) sum v(n-l) v(l-n) / ((l-n)(l+n-theta))`.
pub fn hill_q_derived(v_hat: &Coefficients, theta: f64, n: i64, ells: impl Iterator<Item = i64>) -> Complex64 {
    let s: Complex64 = ells
        .filter(|&l| l != n)
        .map(|l| coefficient(v_hat, n - l) * coefficient(v_hat, l - n) / ((l - n) as f64 * ((l + n) as f64 - theta)))
        .sum();
    s / (4.0 * PI * PI)
}
