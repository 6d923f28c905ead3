use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::coefficients::KernelCoefficients;
use crate::error::Result;
use crate::opmatrix::{BlockMatrix, CMatrix, Partition, Spectrum, TruncationWindow};

/// `lambda_k = pi i (2k - theta)` for `d/dt` with the `theta` boundary phase.
pub fn build_first_derivative(theta: f64, window: TruncationWindow) -> Result<Spectrum> {
    super::check_theta(theta, 0.0, 2.0, true)?;
    Spectrum::from_fn(window, 1, |k| Complex64::new(0.0, PI * (2 * k) as f64 - PI * theta))
}

/// Entry `(m, n)` is `K(-m, n)`.
pub fn build_integral_perturbation(
    spectrum: &Arc<Spectrum>,
    k_hat: impl Fn(i64, i64) -> Complex64,
) -> Result<BlockMatrix> {
    let d = spectrum.dim();
    let data = CMatrix::from_fn(d, d, |i, j| k_hat(-spectrum.label_of_basis(i), spectrum.label_of_basis(j)));
    BlockMatrix::from_dense(&Arc::new(Partition::trivial(spectrum)), data)
}

pub fn kernel_from_map(map: &KernelCoefficients) -> impl Fn(i64, i64) -> Complex64 + '_ {
    move |m, n| map.get(&(m, n)).copied().unwrap_or_default()
}

/// Fourier coefficients of `K(s, t) = s + t`.
pub fn s_plus_t(m: i64, n: i64) -> Complex64 {
    match (m, n) {
        (0, 0) => Complex64::new(1.0, 0.0),
        (m, 0) => -1.0 / Complex64::new(0.0, 2.0 * PI * m as f64),
        (0, n) => -1.0 / Complex64::new(0.0, 2.0 * PI * n as f64),
        _ => Complex64::default(),
    }
}
