mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use num_complex::Complex64;
use simop::models::{
    build_dirac, build_first_derivative, build_hill, build_hill_spectrum, build_integral_perturbation,
    involution_inequality_lhs, l2_norm_sqr, parse_coefficients, parse_kernel_coefficients, parse_matrix_coefficients,
    random_trig_poly, s_plus_t, tilde_coefficient, Coefficients, ModelData, ModelParams, ModelRegistry,
};
use simop::opmatrix::{eta_constant, separation_delta, Spectrum, TruncationWindow};
use simop::Error;

#[test]
fn first_derivative_eigenvalues() {
    let s = build_first_derivative(0.0, window(4)).unwrap();
    assert_eq!(s.values()[s.position(1).unwrap()], c(0.0, 2.0 * PI));
    let s1 = build_first_derivative(1.0, window(4)).unwrap();
    for k in 1..=4 {
        let a = s1.values()[s1.position(k).unwrap()];
        let b = s1.values()[s1.position(1 - k).unwrap()];
        assert!((a + b).norm() < 1e-14);
    }
    assert!(build_first_derivative(2.0, window(4)).is_err());
}

#[test]
fn first_derivative_constants() {
    for theta in [0.0, 0.4, 1.0] {
        let s = build_first_derivative(theta, window(64)).unwrap();
        assert!((separation_delta(&s).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((eta_constant(&s).unwrap() - 1.0 / 12.0).abs() < 1e-3);
    }
}

#[test]
fn zero_kernel_gives_zero() {
    let spec = Arc::new(build_first_derivative(0.0, window(4)).unwrap());
    assert_eq!(build_integral_perturbation(&spec, |_, _| c(0.0, 0.0)).unwrap().hs(), 0.0);
}

#[test]
fn sum_kernel_coefficient_table() {
    assert_eq!(s_plus_t(0, 0), c(1.0, 0.0));
    for m in [-3, 1, 2] {
        let want = -1.0 / c(0.0, 2.0 * PI * m as f64);
        assert!((s_plus_t(m, 0) - want).norm() < 1e-16);
        assert!((s_plus_t(0, m) - want).norm() < 1e-16);
        assert_eq!(s_plus_t(m, 2), c(0.0, 0.0));
    }
    let p = kernel(2);
    let spec = p.spectrum();
    let i = |k| spec.basis_range(spec.position(k).unwrap()).start;
    assert_eq!(p.perturbation().entry(i(1), i(0)), s_plus_t(-1, 0));
    assert_eq!(p.perturbation().entry(i(0), i(2)), s_plus_t(0, 2));
}

#[test]
fn sum_kernel_norm_approaches_limit() {
    let limit = (7.0f64 / 6.0).sqrt();
    let mut last = 0.0;
    for n in [8, 64, 512] {
        let h = kernel(n).perturbation().hs();
        assert!(h < limit && h > last);
        last = h;
    }
    assert!((limit - last) < 1e-3);
    // Parseval on the window
    let p = kernel(16);
    let sum: f64 = (-16..=16i64).flat_map(|m| (-16..=16i64).map(move |n| s_plus_t(-m, n).norm_sqr())).sum();
    assert!((p.perturbation().hs().powi(2) - sum).abs() < 1e-14);
}

fn coeffs(pairs: &[(i64, Complex64)]) -> Coefficients {
    pairs.iter().copied().collect()
}

#[test]
fn involution_constant_potential_is_antidiagonal() {
    let inst = build("involution", 4, 0.0, ModelData::Coefficients(coeffs(&[(0, c(0.7, -0.1))])));
    let spec = inst.problem.spectrum();
    let b = inst.problem.perturbation();
    for i in 0..spec.dim() {
        for j in 0..spec.dim() {
            let want = if spec.label_of_basis(i) + spec.label_of_basis(j) == 0 { c(0.7, -0.1) } else { c(0.0, 0.0) };
            assert_eq!(b.entry(i, j), want);
        }
    }
    let zero = build("involution", 4, 0.3, ModelData::None);
    assert_eq!(zero.problem.perturbation().hs(), 0.0);
}

#[test]
fn integer_phase_is_a_shift() {
    let v = coeffs(&[(-1, c(0.2, 0.1)), (2, c(-0.3, 0.0))]);
    for k in -4..=4 {
        let want = v.get(&(k - 1)).copied().unwrap_or_default();
        assert_eq!(tilde_coefficient(&v, 1.0, k), want);
    }
}

#[test]
fn fractional_phase_by_parseval() {
    // |v~| has the same L2 norm as |v|
    let v = coeffs(&[(0, c(0.5, 0.0)), (1, c(0.1, 0.2))]);
    let total: f64 = (-4000..=4000).map(|k| tilde_coefficient(&v, 0.37, k).norm_sqr()).sum();
    assert!((total - l2_norm_sqr(&v)).abs() < 1e-4, "{total}");
}

#[test]
fn involution_inequality_holds_for_samples() {
    let mut r = rng(21);
    for _ in 0..5 {
        let v = random_trig_poly(&mut r, 3, true);
        let lhs = involution_inequality_lhs(&v, 24);
        assert!(lhs <= 2.25 * l2_norm_sqr(&v).powi(2) * (1.0 + 1e-9), "{lhs}");
    }
}

#[test]
fn dirac_zero_potential() {
    let m = build_dirac(&Default::default(), window(4), 64).unwrap();
    assert_eq!(m.b.hs(), 0.0);
    assert_eq!(m.b_tilde.hs(), 0.0);
    assert_eq!(m.spectrum.multiplicities(), vec![2; 9]);
    assert_eq!(m.spectrum.values()[m.spectrum.position(3).unwrap()], c(6.0 * PI, 0.0));
}

#[test]
fn dirac_without_diagonal_potential_is_unchanged() {
    let mut v: [Coefficients; 4] = Default::default();
    v[1] = coeffs(&[(1, c(0.2, 0.0)), (-2, c(0.0, 0.1))]);
    v[2] = coeffs(&[(0, c(0.1, 0.1)), (3, c(-0.05, 0.0))]);
    let m = build_dirac(&v, window(8), 64).unwrap();
    assert!(max_abs_diff(m.b.dense(), m.b_tilde.dense()) < 1e-14);
}

#[test]
fn dirac_constant_diagonal_spectrum() {
    let (c1, c4) = (c(0.3, 0.0), c(-0.1, 0.2));
    let mut v: [Coefficients; 4] = Default::default();
    v[0] = coeffs(&[(0, c1)]);
    v[3] = coeffs(&[(0, c4)]);
    let m = build_dirac(&v, window(6), 64).unwrap();
    let a_minus_b = free_diagonal(&m.spectrum) - m.b_tilde.dense();
    let got = simop_oracle::eigenvalues(&a_minus_b).unwrap();
    let want: Vec<Complex64> =
        (-6..=6).flat_map(|n| [c(2.0 * PI * n as f64, 0.0) - c1, c(2.0 * PI * n as f64, 0.0) - c4]).collect();
    assert!(simop_oracle::pairing_distance(&got, &want) < 1e-12);
}

fn free_diagonal(s: &Spectrum) -> simop::opmatrix::CMatrix {
    simop::opmatrix::CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(s.basis_values()))
}

#[test]
fn dirac_reduction_preserves_interior_spectrum() {
    let mut v: [Coefficients; 4] = Default::default();
    v[0] = coeffs(&[(0, c(0.2, 0.0)), (1, c(0.05, 0.02)), (-1, c(0.05, -0.02))]);
    v[3] = coeffs(&[(0, c(-0.1, 0.0)), (2, c(0.03, 0.0))]);
    v[1] = coeffs(&[(1, c(0.1, 0.0))]);
    v[2] = coeffs(&[(-1, c(0.05, 0.05))]);
    let n = 32;
    let m = build_dirac(&v, window(n), 512).unwrap();
    let d = free_diagonal(&m.spectrum);
    let e1 = simop_oracle::eigenvalues(&(&d - m.b.dense())).unwrap();
    let e2 = simop_oracle::eigenvalues(&(&d - m.b_tilde.dense())).unwrap();
    let interior = |z: &&Complex64| z.re.abs() <= 2.0 * PI * (n as f64 / 2.0);
    for z in e1.iter().filter(interior) {
        let near = e2.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
        assert!(near < 1e-6, "{z}: {near}");
    }
}

#[test]
fn dirac_grid_checks() {
    assert!(build_dirac(&Default::default(), window(8), 16).is_err());
    assert!(build_dirac(&Default::default(), window(8), 48).is_err());
    let inst = ModelRegistry::builtin().get("dirac").unwrap();
    let mut params = ModelParams::new(window(4), ModelData::None);
    params.theta = 0.5;
    assert!(matches!(inst.build(&params), Err(Error::NotSupported(_))));
}

#[test]
fn hill_structure() {
    assert!(build_hill_spectrum(0.0, window(4)).is_err());
    assert!(build_hill_spectrum(1.0, window(4)).is_err());
    let s = build_hill_spectrum(0.5, window(8)).unwrap();
    let vals = s.values();
    let mut delta = f64::INFINITY;
    for i in 0..vals.len() {
        for j in 0..i {
            delta = delta.min((vals[i] - vals[j]).norm());
        }
    }
    assert!((separation_delta(&s).unwrap() - delta).abs() < 1e-12);
    assert!((vals[s.position(1).unwrap()].re - (1.5 * PI).powi(2)).abs() < 1e-12);

    let (_, zero) = build_hill(0.5, &Coefficients::new(), window(4)).unwrap();
    assert_eq!(zero.hs(), 0.0);
    let v = random_trig_poly(&mut rng(22), 4, true);
    let (_, b) = build_hill(0.5, &v, window(8)).unwrap();
    assert!(max_abs_diff(b.dense(), &b.dense().adjoint()) < 1e-16);
}

#[test]
fn registry_names_and_data_checks() {
    let reg = ModelRegistry::builtin();
    assert_eq!(reg.names(), vec!["dirac", "first_derivative_integral", "hill", "involution"]);
    assert!(reg.get("wave").is_err());
    let params = ModelParams::new(window(4), ModelData::Builtin("s_times_t".into()));
    assert!(reg.get("first_derivative_integral").unwrap().build(&params).is_err());
    let params = ModelParams::new(window(4), ModelData::Builtin("s_plus_t".into()));
    assert!(reg.get("hill").unwrap().build(&params).is_err());
}

#[test]
fn coefficient_files() {
    let v = parse_coefficients("# potential\nk,re,im\n0, 1.5, 0\n-2, 0.25, -1\n\n".as_bytes()).unwrap();
    assert_eq!(v.len(), 2);
    assert_eq!(v[&-2], c(0.25, -1.0));
    let kern = parse_kernel_coefficients("1,0,0.5,0\n0,1,0.5,0\n".as_bytes()).unwrap();
    assert_eq!(kern[&(0, 1)], c(0.5, 0.0));
    let m = parse_matrix_coefficients("j,k,re,im\n2,1,0.1,0\n4,0,0,0.2\n".as_bytes()).unwrap();
    assert_eq!(m[1][&1], c(0.1, 0.0));
    assert_eq!(m[3][&0], c(0.0, 0.2));
}

#[test]
fn malformed_coefficient_files() {
    let line = |e: Error| match e {
        Error::Parse { line, .. } => line,
        other => panic!("unexpected {other:?}"),
    };
    assert_eq!(line(parse_coefficients("0,1,0\n1,x,0\n".as_bytes()).unwrap_err()), 2);
    assert_eq!(line(parse_coefficients("0,1,0\n0,2,0\n".as_bytes()).unwrap_err()), 2);
    assert_eq!(line(parse_coefficients("0,1\n".as_bytes()).unwrap_err()), 1);
    assert_eq!(line(parse_coefficients("0,inf,0\n".as_bytes()).unwrap_err()), 1);
    assert_eq!(line(parse_matrix_coefficients("5,0,1,0\n".as_bytes()).unwrap_err()), 1);
}

#[test]
fn window_must_hold_an_interior() {
    assert!(TruncationWindow::new(1, 0.5).is_err());
    assert!(TruncationWindow::new(4, 0.5).is_ok());
}
