#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simop::models::{ModelData, ModelParams, ModelRegistry};
use simop::opmatrix::{BlockMatrix, CMatrix, Partition, Spectrum, TruncationWindow};
use simop::similarity::Problem;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn window(n: usize) -> TruncationWindow {
    TruncationWindow::new(n, 0.5).unwrap()
}

/// `lambda_k = 2 pi i k` on `[-n, n]`.
pub fn periodic(n: usize) -> Arc<Spectrum> {
    Arc::new(Spectrum::from_fn(window(n), 1, |k| c(0.0, 2.0 * PI * k as f64)).unwrap())
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_block(rng: &mut ChaCha8Rng, p: &Arc<Partition>) -> BlockMatrix {
    BlockMatrix::from_dense(p, random_dense(rng, p.dim(), p.dim())).unwrap()
}

pub fn trivial(spec: &Arc<Spectrum>) -> Arc<Partition> {
    Arc::new(Partition::trivial(spec))
}

pub fn build(family: &str, n: usize, theta: f64, data: ModelData) -> simop::models::ModelInstance {
    let mut params = ModelParams::new(window(n), data);
    params.theta = theta;
    ModelRegistry::builtin().get(family).unwrap().build(&params).unwrap()
}

/// `d/dt` plus the integral operator with kernel `s + t`.
pub fn kernel(n: usize) -> Problem {
    build("first_derivative_integral", n, 0.0, ModelData::Builtin("s_plus_t".into())).problem
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
