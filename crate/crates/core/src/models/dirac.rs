use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::coefficients::{coefficient, support_radius, Coefficients};
use crate::error::{Error, Result};
use crate::opmatrix::{BlockMatrix, CMatrix, Partition, Spectrum, TruncationWindow};

/// `lambda_n = 2 pi n`, each with the two basis vectors `(e_{-n}, 0)` and `(0, e_n)`.
pub fn build_dirac_spectrum(window: TruncationWindow) -> Result<Spectrum> {
    Spectrum::from_fn(window, 2, |n| Complex64::new(2.0 * PI * n as f64, 0.0))
}

#[derive(Debug, Clone)]
pub struct DiracModel {
    pub spectrum: Spectrum,
    pub b: BlockMatrix,
    pub b_tilde: BlockMatrix,
    pub grid_points: usize,
}

fn at(spec: &Spectrum, n: i64, slot: usize) -> usize {
    let pos = spec.position(n).expect("label inside window");
    spec.basis_range(pos).start + slot
}

/// Fill the four 2x2 entry families from index functions.
fn assemble(spec: &Spectrum, f: [&dyn Fn(i64, i64) -> Complex64; 4]) -> CMatrix {
    let d = spec.dim();
    let mut out = CMatrix::zeros(d, d);
    let labels: Vec<i64> = spec.window().labels().collect();
    for &m in &labels {
        for &n in &labels {
            out[(at(spec, m, 0), at(spec, n, 0))] = f[0](m, n);
            out[(at(spec, m, 0), at(spec, n, 1))] = f[1](m, n);
            out[(at(spec, m, 1), at(spec, n, 0))] = f[2](m, n);
            out[(at(spec, m, 1), at(spec, n, 1))] = f[3](m, n);
        }
    }
    out
}

/// Values of `sum_k c_k e^{2 pi i k t_j}` on `t_j = j/G`.
fn synthesize(
    planner: &mut FftPlanner<f64>,
    coeffs: impl Iterator<Item = (i64, Complex64)>,
    g: usize,
) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); g];
    for (k, z) in coeffs {
        buf[k.rem_euclid(g as i64) as usize] += z;
    }
    planner.plan_fft_inverse(g).process(&mut buf);
    buf
}

/// `(1/G) sum_j u(t_j) e^{-2 pi i k t_j}`, the trapezoidal rule for periodic `u`.
fn analyse(planner: &mut FftPlanner<f64>, mut values: Vec<Complex64>) -> Vec<Complex64> {
    let g = values.len();
    planner.plan_fft_forward(g).process(&mut values);
    let scale = 1.0 / g as f64;
    values.iter_mut().for_each(|z| *z *= scale);
    values
}

/// `B` from the matrix potential and the reduced `B~` with `u2 = v2 e^{ig}`,
/// `u3 = v3 e^{-ig}`, `g(t) = sum_{k != 0} w(k)(e^{2 pi i k t} - 1)/(2 pi i k)`
/// for `w = v1 + v4`.
pub fn build_dirac(v: &[Coefficients; 4], window: TruncationWindow, grid_points: usize) -> Result<DiracModel> {
    let spectrum = build_dirac_spectrum(window)?;
    let n = window.half_width();
    let radius = v.iter().map(support_radius).max().unwrap_or(0) as usize;
    if !grid_points.is_power_of_two() || grid_points < 4 * n || grid_points <= 2 * radius {
        return Err(Error::invalid(format!(
            "grid of {grid_points} points cannot resolve window N = {n} and coefficient radius {radius}; \
             need a power of two >= 4N and > 2 * radius"
        )));
    }
    let c = |j: usize| move |k: i64| coefficient(&v[j], k);
    let b =
        assemble(&spectrum, [&|m, k| c(0)(k - m), &|m, k| c(1)(-(m + k)), &|m, k| c(2)(m + k), &|m, k| c(3)(m - k)]);

    let g = grid_points;
    let mut planner = FftPlanner::new();
    let mut w = v[0].clone();
    for (&k, &z) in &v[3] {
        *w.entry(k).or_default() += z;
    }
    let g_coeffs: Vec<(i64, Complex64)> =
        w.iter().filter(|(&k, _)| k != 0).map(|(&k, &z)| (k, z / Complex64::new(0.0, 2.0 * PI * k as f64))).collect();
    let offset: Complex64 = g_coeffs.iter().map(|(_, z)| z).sum();
    let phase: Vec<Complex64> =
        synthesize(&mut planner, g_coeffs.into_iter(), g).into_iter().map(|z| z - offset).collect();
    let v2 = synthesize(&mut planner, v[1].iter().map(|(&k, &z)| (k, z)), g);
    let v3 = synthesize(&mut planner, v[2].iter().map(|(&k, &z)| (k, z)), g);
    let i = Complex64::new(0.0, 1.0);
    let u2 = analyse(&mut planner, v2.iter().zip(&phase).map(|(a, p)| a * (i * p).exp()).collect());
    let u3 = analyse(&mut planner, v3.iter().zip(&phase).map(|(a, p)| a * (-i * p).exp()).collect());
    let uc = |u: &Vec<Complex64>, k: i64| u[k.rem_euclid(g as i64) as usize];
    let (d1, d4) = (coefficient(&v[0], 0), coefficient(&v[3], 0));
    let zero = Complex64::default();
    let b_tilde = assemble(
        &spectrum,
        [&|m, k| if m == k { d1 } else { zero }, &|m, k| uc(&u2, -(m + k)), &|m, k| uc(&u3, m + k), &|m, k| {
            if m == k {
                d4
            } else {
                zero
            }
        }],
    );
    let p = Arc::new(Partition::trivial(&spectrum));
    Ok(DiracModel {
        b: BlockMatrix::from_dense(&p, b)?,
        b_tilde: BlockMatrix::from_dense(&p, b_tilde)?,
        spectrum,
        grid_points,
    })
}

/// Smallest admissible power-of-two grid with some headroom.
pub fn default_grid_points(window: TruncationWindow, v: &[Coefficients; 4]) -> usize {
    let radius = v.iter().map(support_radius).max().unwrap_or(0) as usize;
    (16 * window.half_width()).max(4 * radius + 2).max(64).next_power_of_two()
}
