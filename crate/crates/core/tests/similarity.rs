mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use num_complex::Complex64;
use simop::models::{hill_q_derived, hill_q_display, involution_p, Coefficients, ModelData};
use simop::opmatrix::{BlockMatrix, CMatrix, Partition};
use simop::similarity::{
    asymptotic_sequences, fixed_point, phi_step, phi_step_zero_diag, preliminary_transform, similarity_residual,
    Certificate, PhiVariant, PipelineOptions, PipelineRegistry, Problem, StageNorm,
};
use simop::transforms::{apply_gamma, apply_j, TransformContext};
use simop::verify::invariant_gates;
use simop::Error;

/// Labels -1, 0, 1 with no interior cut.
fn three_point() -> Arc<simop::opmatrix::Spectrum> {
    let w = simop::opmatrix::TruncationWindow::new(1, 1.0).unwrap();
    Arc::new(simop::opmatrix::Spectrum::from_fn(w, 1, |k| c(0.0, 2.0 * PI * k as f64)).unwrap())
}

fn opts() -> PipelineOptions {
    PipelineOptions::default()
}

/// `Phi` written out term by term with an entrywise `Gamma` and `J`.
fn phi_reference(x: &CMatrix, b: &CMatrix, lambda: &[Complex64]) -> CMatrix {
    let d = x.nrows();
    let gamma = |m: &CMatrix| {
        CMatrix::from_fn(d, d, |i, j| if i == j { c(0.0, 0.0) } else { m[(i, j)] / (lambda[i] - lambda[j]) })
    };
    let j = |m: &CMatrix| CMatrix::from_fn(d, d, |i, k| if i == k { m[(i, i)] } else { c(0.0, 0.0) });
    let gx = gamma(x);
    let bgx = b * &gx;
    &bgx - &gx * j(b) - &gx * j(&bgx) + b
}

#[test]
fn phi_at_zero_is_perturbation() {
    let spec = periodic(4);
    let ctx = TransformContext::trivial(&spec);
    let b = random_block(&mut rng(1), ctx.partition());
    let z = BlockMatrix::zeros(ctx.partition());
    assert_eq!(phi_step(&z, &b, &ctx).unwrap().dense(), b.dense());
    let off = &b - &apply_j(&ctx, &b).unwrap();
    assert_eq!(phi_step_zero_diag(&z, &off, &ctx).unwrap().dense(), off.dense());
}

#[test]
fn phi_of_zero_perturbation_vanishes() {
    let ctx = TransformContext::trivial(&periodic(4));
    let x = random_block(&mut rng(2), ctx.partition());
    assert_eq!(phi_step(&x, &BlockMatrix::zeros(ctx.partition()), &ctx).unwrap().hs(), 0.0);
}

#[test]
fn phi_matches_straight_line_evaluation() {
    let spec = periodic(3);
    let ctx = TransformContext::trivial(&spec);
    let mut r = rng(3);
    let x = random_block(&mut r, ctx.partition());
    let b = random_block(&mut r, ctx.partition());
    let got = phi_step(&x, &b, &ctx).unwrap();
    let want = phi_reference(x.dense(), b.dense(), spec.basis_values());
    assert!(max_abs_diff(got.dense(), &want) < 1e-14);
}

#[test]
fn three_term_map_agrees_when_diagonal_vanishes() {
    let ctx = TransformContext::trivial(&periodic(4));
    let mut r = rng(4);
    let x = random_block(&mut r, ctx.partition());
    let b = random_block(&mut r, ctx.partition());
    let off = &b - &apply_j(&ctx, &b).unwrap();
    let a = phi_step(&x, &off, &ctx).unwrap();
    let z = phi_step_zero_diag(&x, &off, &ctx).unwrap();
    assert!(max_abs_diff(a.dense(), z.dense()) < 1e-15);
    assert!(phi_step_zero_diag(&x, &b, &ctx).is_err());
}

#[test]
fn three_term_map_two_iterations_by_hand() {
    // labels -1 and 0 carry -2 pi i and 0; label 1 stays uncoupled
    let ctx = TransformContext::trivial(&three_point());
    let (b01, b10) = (c(0.03, 0.01), c(-0.02, 0.04));
    let mut b = BlockMatrix::zeros(ctx.partition());
    b.dense_mut()[(0, 1)] = b01;
    b.dense_mut()[(1, 0)] = b10;
    let x1 = phi_step_zero_diag(&BlockMatrix::zeros(ctx.partition()), &b, &ctx).unwrap();
    let x2 = phi_step_zero_diag(&x1, &b, &ctx).unwrap();
    let d = c(0.0, -2.0 * PI);
    let bc = b01 * b10;
    let mut want = CMatrix::zeros(3, 3);
    want[(0, 0)] = -bc / d;
    want[(1, 1)] = bc / d;
    want[(0, 1)] = b01 - b01 * bc / (d * d);
    want[(1, 0)] = b10 - b10 * bc / (d * d);
    assert!(max_abs_diff(x2.dense(), &want) < 1e-17);
}

#[test]
fn fixed_point_of_zero() {
    let ctx = TransformContext::trivial(&periodic(3));
    let cert = Certificate { gamma: 1.0 / (2.0 * PI), norm: StageNorm::Hs, variant: PhiVariant::Full };
    let fp = fixed_point(&BlockMatrix::zeros(ctx.partition()), &ctx, &cert, 1e-12, 10).unwrap();
    assert_eq!(fp.iterations, 1);
    assert_eq!(fp.x_star.hs(), 0.0);
}

#[test]
fn fixed_point_matches_two_by_two_eigendecomposition() {
    // only labels 0 and 1 couple; eigenvalues 0 and 2 pi i
    let ctx = TransformContext::trivial(&three_point());
    let lam = ctx.spectrum().basis_values().to_vec();
    let (b, cc) = (c(0.06, 0.02), c(-0.05, 0.06));
    let scale = 0.1 / (b.norm_sqr() + cc.norm_sqr()).sqrt();
    let (b, cc) = (b * scale, cc * scale);
    let mut bq = BlockMatrix::zeros(ctx.partition());
    bq.dense_mut()[(1, 2)] = b;
    bq.dense_mut()[(2, 1)] = cc;
    assert!((bq.hs() - 0.1).abs() < 1e-15);
    let cert = Certificate { gamma: 1.0 / (2.0 * PI), norm: StageNorm::Hs, variant: PhiVariant::ZeroDiagonal };
    let fp = fixed_point(&bq, &ctx, &cert, 1e-15, 100).unwrap();

    let oracle = simop_oracle::eigen(&CMatrix::from_fn(2, 2, |i, j| {
        let d = if i == j { lam[i + 1] } else { c(0.0, 0.0) };
        d - bq.entry(i + 1, j + 1)
    }))
    .unwrap();
    // columns of I + U are eigenvectors scaled to unit diagonal
    let (l0, l1) = (lam[1], lam[2]);
    let pick = |target: Complex64| {
        (0..2)
            .min_by(|&a, &b| (oracle.values[a] - target).norm().total_cmp(&(oracle.values[b] - target).norm()))
            .unwrap()
    };
    let (i0, i1) = (pick(l0), pick(l1));
    let u10 = oracle.vectors[(1, i0)] / oracle.vectors[(0, i0)];
    let u01 = oracle.vectors[(0, i1)] / oracle.vectors[(1, i1)];
    let mut want = CMatrix::zeros(3, 3);
    want[(1, 1)] = l0 - oracle.values[i0];
    want[(2, 2)] = l1 - oracle.values[i1];
    want[(1, 2)] = u01 * (l0 - l1);
    want[(2, 1)] = u10 * (l1 - l0);
    assert!(max_abs_diff(fp.x_star.dense(), &want) < 1e-13, "{}", fp.x_star.dense());
}

#[test]
fn fixed_point_refuses_without_certificate() {
    let ctx = TransformContext::trivial(&periodic(3));
    let b = random_block(&mut rng(5), ctx.partition()).scale(c(10.0, 0.0));
    let cert = Certificate { gamma: 1.0 / (2.0 * PI), norm: StageNorm::Hs, variant: PhiVariant::Full };
    assert!(matches!(fixed_point(&b, &ctx, &cert, 1e-12, 50), Err(Error::ContractionViolation { .. })));
}

#[test]
fn kernel_model_contracts_at_certified_rate() {
    let p = kernel(64);
    let run = PipelineRegistry::builtin().get("mt1").unwrap().run(&p, &opts()).unwrap();
    let bound = 4.0 / (2.0 * PI) * (7.0f64 / 6.0).sqrt() + 0.05;
    assert!(run.result.contraction_q <= bound);
    assert!(run.result.iterations <= 60);
    assert!(run.result.certificate_q < 1.0);
}

#[test]
fn preliminary_of_diagonal_is_identity() {
    let spec = periodic(4);
    let ctx = TransformContext::coarse(&spec, 1);
    let d = apply_j(&TransformContext::trivial(&spec), &random_block(&mut rng(6), &trivial(&spec))).unwrap();
    let pt = preliminary_transform(&d, &ctx).unwrap();
    assert_eq!(pt.gamma_b.hs(), 0.0);
    assert_eq!(pt.b0.hs(), 0.0);
}

#[test]
fn preliminary_remainder_is_second_order() {
    let spec = periodic(4);
    let ctx = TransformContext::coarse(&spec, 0);
    let t = TransformContext::trivial(&spec);
    let raw = random_block(&mut rng(7), &trivial(&spec));
    let off = &raw - &apply_j(&t, &raw).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3] {
        let b = off.scale(c(eps, 0.0));
        let pt = preliminary_transform(&b, &ctx).unwrap();
        let g = apply_gamma(&ctx, &b).unwrap();
        let second = &(&b * &g) - &(&g * &apply_j(&ctx, &b).unwrap());
        let err = (&pt.b0 - &second).hs();
        assert!(err <= 10.0 * eps.powi(3) * off.hs().powi(3), "eps {eps}: {err}");
        assert!(err < last);
        last = err;
        assert!(pt.identity_residual < 1e-14);
    }
}

#[test]
fn involution_remainder_bound() {
    let v: Coefficients = [(-1, c(0.3, 0.0)), (0, c(0.2, 0.0)), (2, c(0.1, 0.0))].into_iter().collect();
    let p = build("involution", 32, 0.0, ModelData::Coefficients(v.clone())).problem;
    let ctx = TransformContext::coarse(p.spectrum(), 0);
    let pt = preliminary_transform(p.perturbation(), &ctx).unwrap();
    let v2 = simop::models::l2_norm_sqr(&v);
    assert!(pt.b0.hs().is_finite());
    assert!(pt.b0.hs() <= 1.5 * v2 / (1.0 - pt.gamma_b_op));
}

#[test]
fn mt3_of_zero_perturbation() {
    let p = build("hill", 8, 0.5, ModelData::None).problem;
    let run = PipelineRegistry::builtin().get("mt3").unwrap().run(&p, &opts()).unwrap();
    assert_eq!(run.result.u.hs(), 0.0);
    assert_eq!(run.result.v.hs(), 0.0);
    let a = run.asymptotics.unwrap();
    assert!(a.p.values().chain(a.q.values()).all(|z| z.norm() == 0.0));
}

#[test]
fn hill_q_matches_assembled_second_order_diagonal() {
    let mut r = rng(8);
    let v = simop::models::random_trig_poly(&mut r, 8, true);
    let n = 32usize;
    let p = build("hill", n, 0.5, ModelData::Coefficients(v.clone())).problem;
    let a = asymptotic_sequences(&p).unwrap().unwrap();
    let ells = || -(n as i64)..=(n as i64);
    for (&k, &q) in &a.q {
        let derived = hill_q_derived(&v, 0.5, k, ells());
        assert!((derived - q).norm() < 1e-10, "n = {k}");
        // the displayed expression carries the opposite sign
        assert!((hill_q_display(&v, 0.5, k, ells()) + q).norm() < 1e-10);
    }
}

#[test]
fn involution_first_order_term() {
    let v: Coefficients = [(-2, c(0.1, 0.05)), (1, c(0.2, 0.0)), (3, c(0.05, -0.1))].into_iter().collect();
    for theta in [0.0, 0.3] {
        let p = build("involution", 16, theta, ModelData::Coefficients(v.clone())).problem;
        let a = asymptotic_sequences(&p).unwrap().unwrap();
        for (&n, &pn) in &a.p {
            assert!((pn - involution_p(&v, theta, n)).norm() < 1e-14, "theta {theta}, n {n}");
        }
    }
}

fn dirac_data(v1: f64, v4: f64, coupling: f64) -> ModelData {
    let mut v: [Coefficients; 4] = Default::default();
    v[0].insert(0, c(v1, 0.0));
    v[3].insert(0, c(v4, 0.0));
    if coupling != 0.0 {
        for j in [1, 2] {
            v[j].insert(1, c(coupling, 0.0));
            v[j].insert(-1, c(coupling, 0.0));
        }
    }
    ModelData::Matrix(Box::new(v))
}

#[test]
fn dirac_constant_diagonal_shifts_spectrum() {
    let inst = build("dirac", 8, 0.0, dirac_data(0.3, -0.2, 0.0));
    let run = PipelineRegistry::builtin().get("mt4").unwrap().run(&inst.problem, &opts()).unwrap();
    let r = &run.result;
    assert_eq!(r.u.hs(), 0.0);
    assert!(r.stage.spectrum().is_derived());
    // no remainder means the derived spectrum is the exact spectrum
    let oracle = simop_oracle::eigenvalues(&inst.problem.assembled()).unwrap();
    let dist = simop_oracle::pairing_distance(r.stage.spectrum().basis_values(), &oracle);
    assert!(dist < 1e-10, "{dist}");
    let free = simop_oracle::pairing_distance(inst.problem.spectrum().basis_values(), &oracle);
    assert!(free > 0.1);
}

#[test]
fn dirac_equal_diagonals_violate_separation() {
    let inst = build("dirac", 8, 0.0, dirac_data(0.3, 0.3, 0.0));
    let err = PipelineRegistry::builtin().get("mt4").unwrap().run(&inst.problem, &opts()).unwrap_err();
    assert!(matches!(err, Error::AssumptionViolation(_)));
}

#[test]
fn dirac_generic_sample_preserves_spectrum() {
    let inst = build("dirac", 12, 0.0, dirac_data(0.1, -0.05, 0.1));
    let run = PipelineRegistry::builtin().get("mt4").unwrap().run(&inst.problem, &opts()).unwrap();
    let gates = invariant_gates(&inst.problem, &run.result).unwrap();
    assert!(gates.iter().all(|g| g.pass), "{gates:?}");
}

#[test]
fn residual_of_trivial_similarity() {
    let spec = periodic(3);
    let p = trivial(&spec);
    let z = BlockMatrix::zeros(&p);
    let r = similarity_residual(&spec, &z, &z, &z).unwrap();
    assert_eq!((r.full, r.interior), (0.0, 0.0));
}

#[test]
fn residual_of_oracle_similarity_and_its_sensitivity() {
    let spec = periodic(2);
    let part = trivial(&spec);
    let b = random_block(&mut rng(9), &part).scale(c(0.3, 0.0));
    let problem = Problem::new(spec.clone(), b.dense().clone()).unwrap();
    let eig = simop_oracle::eigen(&problem.assembled()).unwrap();
    let lam = spec.basis_values();
    // order eigenpairs by proximity to the free eigenvalues
    let mut u = CMatrix::zeros(5, 5);
    let mut v = CMatrix::zeros(5, 5);
    let mut used = [false; 5];
    for i in 0..5 {
        let k = (0..5)
            .filter(|&k| !used[k])
            .min_by(|&a, &b| (eig.values[a] - lam[i]).norm().total_cmp(&(eig.values[b] - lam[i]).norm()))
            .unwrap();
        used[k] = true;
        let s = eig.vectors[(i, k)];
        for r in 0..5 {
            u[(r, i)] = eig.vectors[(r, k)] / s;
        }
        u[(i, i)] -= c(1.0, 0.0);
        v[(i, i)] = lam[i] - eig.values[k];
    }
    let ub = BlockMatrix::from_dense(&part, u.clone()).unwrap();
    let vb = BlockMatrix::from_dense(&part, v).unwrap();
    let r = similarity_residual(&spec, &b, &ub, &vb).unwrap();
    assert!(r.full <= 1e-10 * r.scale, "{r:?}");
    u[(0, 4)] += c(1e-3, 0.0);
    let bad = BlockMatrix::from_dense(&part, u).unwrap();
    let r = similarity_residual(&spec, &b, &bad, &vb).unwrap();
    assert!(r.full >= 1e-4 * r.scale);
}

#[test]
fn registry_lists_and_rejects() {
    let reg = PipelineRegistry::builtin();
    assert_eq!(reg.names(), vec!["auto", "mt1", "mt2", "mt3", "mt4", "weighted"]);
    assert!(reg.get("mt9").is_err());
}

#[test]
fn every_pipeline_passes_gates_on_kernel_model() {
    let p = kernel(32);
    for name in ["mt1", "weighted", "mt3", "mt4", "auto"] {
        let run = PipelineRegistry::builtin().get(name).unwrap().run(&p, &opts()).unwrap();
        let gates = invariant_gates(&p, &run.result).unwrap();
        assert!(gates.iter().all(|g| g.pass), "{name}: {gates:?}");
    }
}

#[test]
fn auto_records_rejected_stages() {
    let p = kernel(32);
    let strong = Problem::new(p.spectrum().clone(), p.perturbation().dense() * c(3.0, 0.0)).unwrap();
    let run = PipelineRegistry::builtin().get("auto").unwrap().run(&strong, &opts()).unwrap();
    let rejected: Vec<_> = run.result.stages.iter().filter(|s| !s.accepted).map(|s| s.name.as_str()).collect();
    assert!(rejected.starts_with(&["mt1", "mt2"]), "{rejected:?}");
    assert_ne!(run.result.pipeline, "mt1");
    let gates = invariant_gates(&strong, &run.result).unwrap();
    assert!(gates.iter().all(|g| g.pass), "{gates:?}");
}

#[test]
fn mt2_certificate_fails_for_kernel_model() {
    let p = kernel(32);
    let err = PipelineRegistry::builtin().get("mt2").unwrap().run(&p, &opts()).unwrap_err();
    assert!(matches!(err, Error::ContractionViolation { .. }));
}

#[test]
fn problem_rejects_wrong_dimension() {
    let spec = periodic(2);
    assert!(Problem::new(spec, CMatrix::zeros(4, 4)).is_err());
    let _ = Arc::new(Partition::trivial(&periodic(2)));
}
