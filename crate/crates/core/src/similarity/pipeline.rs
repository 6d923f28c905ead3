use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmatrix::{
    eta_constant, separation_delta, shift_condition, BlockMatrix, CMatrix, Partition, PartitionKind, SpectralEntry,
    Spectrum,
};
use crate::transforms::{apply_gamma, apply_j, TransformContext};
use crate::weighted::{alpha_sequence, select_coarsening_from, WeightSequence};

use super::fixed_point::{fixed_point, Certificate, FixedPoint, PhiVariant, StageNorm};
use super::preliminary::{select_preliminary, PreliminaryTransform};
use super::residual::{offdiagonal_norm, similarity_residual, ResidualReport};

/// `A - B` on a truncation window: the free spectrum and the perturbation on
/// its trivial partition.
#[derive(Debug, Clone)]
pub struct Problem {
    spectrum: Arc<Spectrum>,
    perturbation: BlockMatrix,
}

impl Problem {
    pub fn new(spectrum: Arc<Spectrum>, perturbation: CMatrix) -> Result<Self> {
        let p = Arc::new(Partition::trivial(&spectrum));
        if perturbation.nrows() != spectrum.dim() || perturbation.ncols() != spectrum.dim() {
            return Err(Error::invalid(format!(
                "perturbation is {}x{}, spectrum has dimension {}",
                perturbation.nrows(),
                perturbation.ncols(),
                spectrum.dim()
            )));
        }
        if perturbation.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("perturbation has non-finite entries"));
        }
        let perturbation = BlockMatrix::from_dense(&p, perturbation)?;
        Ok(Problem { spectrum, perturbation })
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn perturbation(&self) -> &BlockMatrix {
        &self.perturbation
    }

    pub fn trivial_context(&self) -> TransformContext {
        TransformContext::trivial(&self.spectrum)
    }

    /// Dense `A - B`.
    pub fn assembled(&self) -> CMatrix {
        let mut m = -self.perturbation.dense().clone();
        for (i, &l) in self.spectrum.basis_values().iter().enumerate() {
            m[(i, i)] += l;
        }
        m
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Upper bound for `4 gamma_m ||B||` when choosing a weighted coarsening.
    pub contraction_margin: f64,
    /// Largest preliminary coarsening tried; defaults to `N - 1`.
    pub max_preliminary_m: Option<usize>,
    /// Fill `c_estimate` from the dense oracle.
    pub oracle: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { tol: 1e-12, max_iter: 200, contraction_margin: 0.99, max_preliminary_m: None, oracle: true }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageReport {
    pub name: String,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
}

impl StageReport {
    fn rejected(name: &str, err: &Error) -> Self {
        StageReport { name: name.to_string(), accepted: false, note: Some(err.to_string()), ..Default::default() }
    }

    fn from_fixed_point(name: &str, ctx: &TransformContext, cert: &Certificate, fp: &FixedPoint) -> Self {
        StageReport {
            name: name.to_string(),
            accepted: true,
            partition: Some(ctx.partition().kind()),
            norm: Some(cert.norm.name()),
            gamma: Some(cert.gamma),
            perturbation_norm: Some(fp.perturbation_norm),
            certificate_q: Some(fp.certificate_q),
            contraction_q: Some(fp.contraction_q),
            iterations: Some(fp.iterations),
            ball_ratio: Some(fp.ball_ratio),
            fixed_point_residual: Some(fp.residual),
            ..Default::default()
        }
    }

    fn from_preliminary(pt: &PreliminaryTransform) -> Self {
        StageReport {
            name: "preliminary".into(),
            accepted: true,
            partition: Some(PartitionKind::Coarse { m: pt.m }),
            norm: Some("op"),
            certificate_q: Some(pt.gamma_b_op),
            identity_residual: Some(pt.identity_residual),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityResult {
    pub pipeline: String,
    pub u: BlockMatrix,
    pub v: BlockMatrix,
    pub x_star: BlockMatrix,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub iterations: usize,
    pub contraction_q: f64,
    pub certificate_q: f64,
    pub residual: ResidualReport,
    pub residual_similarity: f64,
    pub residual_offdiag_v: f64,
    /// 1-norm condition estimate of `I + U`.
    pub condition: Option<f64>,
    /// Partition on which `V` is block diagonal; its spectrum may be derived.
    pub stage: TransformContext,
    pub stages: Vec<StageReport>,
    /// Weight sequence of the last weighted stage.
    pub weights: Option<WeightSequence>,
    pub diagnostics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AsymptoticSequences {
    pub p: BTreeMap<i64, Complex64>,
    pub q: BTreeMap<i64, Complex64>,
    /// `b_n - p_n - q_n` with `b_n` from the oracle.
    pub c_estimate: BTreeMap<i64, Complex64>,
    pub b: BTreeMap<i64, Complex64>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub result: SimilarityResult,
    pub asymptotics: Option<AsymptoticSequences>,
}

pub trait Pipeline: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun>;
}

struct Assembly {
    u: CMatrix,
    v: CMatrix,
    x_star: BlockMatrix,
    m: Option<usize>,
    k: Option<usize>,
    iterations: usize,
    contraction_q: f64,
    certificate_q: f64,
    stage: TransformContext,
    stages: Vec<StageReport>,
    weights: Option<WeightSequence>,
    diagnostics: BTreeMap<String, f64>,
}

fn finish(name: &str, problem: &Problem, a: Assembly) -> Result<SimilarityResult> {
    let p = problem.perturbation.partition();
    let u = BlockMatrix::from_dense(p, a.u)?;
    let v = BlockMatrix::from_dense(p, a.v)?;
    let residual = similarity_residual(&problem.spectrum, &problem.perturbation, &u, &v)?;
    let residual_offdiag_v = offdiagonal_norm(a.stage.partition().basis_groups(), v.dense());
    let condition = shift_condition(&u);
    Ok(SimilarityResult {
        pipeline: name.to_string(),
        residual_similarity: residual.full,
        residual,
        residual_offdiag_v,
        condition,
        u,
        v,
        x_star: a.x_star,
        m: a.m,
        k: a.k,
        iterations: a.iterations,
        contraction_q: a.contraction_q,
        certificate_q: a.certificate_q,
        stage: a.stage,
        stages: a.stages,
        weights: a.weights,
        diagnostics: a.diagnostics,
    })
}

fn zero_perturbation(name: &str, problem: &Problem) -> Option<Result<SimilarityResult>> {
    if problem.perturbation.hs() != 0.0 {
        return None;
    }
    let ctx = problem.trivial_context();
    let d = problem.spectrum.dim();
    let stage =
        StageReport { name: name.into(), accepted: true, note: Some("zero perturbation".into()), ..Default::default() };
    Some(finish(
        name,
        problem,
        Assembly {
            u: CMatrix::zeros(d, d),
            v: CMatrix::zeros(d, d),
            x_star: BlockMatrix::zeros(ctx.partition()),
            m: None,
            k: None,
            iterations: 0,
            contraction_q: 0.0,
            certificate_q: 0.0,
            stage: ctx,
            stages: vec![stage],
            weights: None,
            diagnostics: BTreeMap::new(),
        },
    ))
}

fn single_stage(
    name: &str,
    problem: &Problem,
    ctx: TransformContext,
    cert: Certificate,
    opts: &PipelineOptions,
    weights: Option<WeightSequence>,
    m: Option<usize>,
) -> Result<SimilarityResult> {
    let b = &problem.perturbation;
    let fp = fixed_point(b, &ctx, &cert, opts.tol, opts.max_iter)?;
    let gx = apply_gamma(&ctx, &fp.x_star)?;
    let jx = apply_j(&ctx, &fp.x_star)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("diagonal_identity".into(), diagonal_identity_residual(b, &fp.x_star, &ctx)?);
    let stage = StageReport::from_fixed_point(name, &ctx, &cert, &fp);
    finish(
        name,
        problem,
        Assembly {
            u: gx.into_dense(),
            v: jx.into_dense(),
            m,
            k: None,
            iterations: fp.iterations,
            contraction_q: fp.contraction_q,
            certificate_q: fp.certificate_q,
            x_star: fp.x_star,
            stage: ctx,
            stages: vec![stage],
            weights,
            diagnostics,
        },
    )
}

/// `||J X - J(B Gamma X) - J B||_hs / ||B||_hs`.
pub fn diagonal_identity_residual(b: &BlockMatrix, x: &BlockMatrix, ctx: &TransformContext) -> Result<f64> {
    let jx = apply_j(ctx, x)?;
    let rhs = &apply_j(ctx, &(b * &apply_gamma(ctx, x)?))? + &apply_j(ctx, b)?;
    let n = b.hs();
    Ok(if n > 0.0 { (&jx - &rhs).hs() / n } else { (&jx - &rhs).hs() })
}

fn variant_for(b: &BlockMatrix, ctx: &TransformContext) -> Result<PhiVariant> {
    let jb = apply_j(ctx, b)?;
    Ok(if jb.hs() <= 1e-12 * b.hs().max(1.0) { PhiVariant::ZeroDiagonal } else { PhiVariant::Full })
}

/// Hilbert–Schmidt norm with `gamma = 1/delta`.
pub struct Mt1;

impl Pipeline for Mt1 {
    fn name(&self) -> &'static str {
        "mt1"
    }
    fn description(&self) -> &'static str {
        "single stage, Hilbert-Schmidt norm, gamma = 1/delta"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        if let Some(r) = zero_perturbation(self.name(), problem) {
            return Ok(PipelineRun { result: r?, asymptotics: None });
        }
        let ctx = problem.trivial_context();
        let delta = separation_delta(&problem.spectrum)?;
        let cert =
            Certificate { gamma: 1.0 / delta, norm: StageNorm::Hs, variant: variant_for(&problem.perturbation, &ctx)? };
        let result = single_stage(self.name(), problem, ctx, cert, opts, None, None)?;
        Ok(PipelineRun { result, asymptotics: None })
    }
}

/// Block Hilbert–Schmidt norm with `gamma = sqrt(eta)`.
pub struct Mt2;

impl Pipeline for Mt2 {
    fn name(&self) -> &'static str {
        "mt2"
    }
    fn description(&self) -> &'static str {
        "single stage, block Hilbert-Schmidt norm, gamma = sqrt(eta)"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        if let Some(r) = zero_perturbation(self.name(), problem) {
            return Ok(PipelineRun { result: r?, asymptotics: None });
        }
        let ctx = problem.trivial_context();
        let eta = eta_constant(&problem.spectrum)?;
        let cert = Certificate {
            gamma: eta.sqrt(),
            norm: StageNorm::HsSigma,
            variant: variant_for(&problem.perturbation, &ctx)?,
        };
        let result = single_stage(self.name(), problem, ctx, cert, opts, None, None)?;
        Ok(PipelineRun { result, asymptotics: None })
    }
}

/// Weighted space of `B` with the smallest admissible coarsening.
pub struct Weighted;

impl Pipeline for Weighted {
    fn name(&self) -> &'static str {
        "weighted"
    }
    fn description(&self) -> &'static str {
        "single stage in the weighted space of B on a coarse partition"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        if let Some(r) = zero_perturbation(self.name(), problem) {
            return Ok(PipelineRun { result: r?, asymptotics: None });
        }
        let base = problem.trivial_context();
        let w = alpha_sequence(&problem.perturbation, &base)?;
        if w.finite_support() {
            let label = w.alpha_map().iter().find(|(_, &a)| a == 0.0).map(|(&l, _)| l).unwrap_or(0);
            return Err(Error::DegenerateWeight { label });
        }
        let choice = select_coarsening_from(&problem.perturbation, &w, opts.contraction_margin, 0)?;
        let ctx = TransformContext::coarse(&problem.spectrum, choice.m);
        let cert = Certificate {
            gamma: choice.gamma,
            norm: StageNorm::Weighted(Box::new(w.clone())),
            variant: PhiVariant::Full,
        };
        let result = single_stage(self.name(), problem, ctx, cert, opts, Some(w), Some(choice.m))?;
        Ok(PipelineRun { result, asymptotics: None })
    }
}

fn max_m(problem: &Problem, opts: &PipelineOptions) -> usize {
    let n = problem.spectrum.window().half_width();
    opts.max_preliminary_m.unwrap_or(n.saturating_sub(1)).min(n)
}

/// Second stage on `q` over `spectrum`, weighted when possible.
struct SecondStage {
    fp: FixedPoint,
    ctx: TransformContext,
    cert: Certificate,
    k: usize,
    weights: Option<WeightSequence>,
}

fn second_stage(
    q: &BlockMatrix,
    spectrum: &Arc<Spectrum>,
    min_k: usize,
    opts: &PipelineOptions,
) -> Result<SecondStage> {
    let base = TransformContext::trivial(spectrum);
    let w = alpha_sequence(q, &base)?;
    if w.finite_support() {
        let label = w.alpha_map().iter().find(|(_, &a)| a == 0.0).map(|(&l, _)| l).unwrap_or(0);
        return Err(Error::DegenerateWeight { label });
    }
    let choice = select_coarsening_from(q, &w, opts.contraction_margin, min_k)?;
    let ctx = TransformContext::coarse(spectrum, choice.m);
    let cert =
        Certificate { gamma: choice.gamma, norm: StageNorm::Weighted(Box::new(w.clone())), variant: PhiVariant::Full };
    let fp = fixed_point(q, &ctx, &cert, opts.tol, opts.max_iter)?;
    Ok(SecondStage { fp, ctx, cert, k: choice.m, weights: Some(w) })
}

/// `U = G + Y + G Y` for the composition `(I + G)(I + Y)`.
fn compose(g: &CMatrix, y: &CMatrix) -> CMatrix {
    g + y + crate::opmatrix::gemm(g, y)
}

fn surrogate_diagnostics(problem: &Problem) -> Result<BTreeMap<String, f64>> {
    let ctx = problem.trivial_context();
    let b = &problem.perturbation;
    let gb = apply_gamma(&ctx, b)?;
    let mut d = BTreeMap::new();
    d.insert("gamma0_b_hs".into(), gb.hs());
    d.insert("b_gamma0_b_hs".into(), (b * &gb).hs());
    d.insert("j0_b_hs".into(), apply_j(&ctx, b)?.hs());
    Ok(d)
}

/// Diagonal of `J_0 B` and `J_0(B Gamma_0 B)` on a simple spectrum.
pub fn asymptotic_sequences(problem: &Problem) -> Result<Option<AsymptoticSequences>> {
    let spec = &problem.spectrum;
    if spec.entries().iter().any(|e| e.multiplicity != 1) {
        return Ok(None);
    }
    let ctx = problem.trivial_context();
    let b = &problem.perturbation;
    let bgb = b * &apply_gamma(&ctx, b)?;
    let w = spec.window().interior_half_width() as i64;
    let mut out = AsymptoticSequences::default();
    for (i, e) in spec.entries().iter().enumerate() {
        if e.index.abs() <= w {
            out.p.insert(e.index, b.entry(i, i));
            out.q.insert(e.index, bgb.entry(i, i));
        }
    }
    Ok(Some(out))
}

fn attach_oracle(problem: &Problem, asym: &mut AsymptoticSequences) -> Result<()> {
    let shifts = crate::verify::eigenvalue_shifts(problem)?;
    for (&n, &p) in &asym.p {
        if let Some(&b) = shifts.get(&n) {
            asym.b.insert(n, b);
            asym.c_estimate.insert(n, b - p - asym.q[&n]);
        }
    }
    Ok(())
}

/// Preliminary transform followed by a weighted stage on `J_m B + B0`.
pub struct Mt3;

impl Pipeline for Mt3 {
    fn name(&self) -> &'static str {
        "mt3"
    }
    fn description(&self) -> &'static str {
        "preliminary transform, then weighted stage on J_m B + B0"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        let mut asym = asymptotic_sequences(problem)?;
        if let Some(r) = zero_perturbation(self.name(), problem) {
            let mut result = r?;
            result.m = Some(0);
            return Ok(PipelineRun { result, asymptotics: asym });
        }
        let diagnostics = surrogate_diagnostics(problem)?;
        let b = &problem.perturbation;
        let pt = select_preliminary(b, &problem.spectrum, max_m(problem, opts))?;
        let mut stages = vec![StageReport::from_preliminary(&pt)];
        let q = &pt.jm_b + &pt.b0;
        let st = second_stage(&q, &problem.spectrum, pt.m, opts)?;
        let mut report = StageReport::from_fixed_point("weighted", &st.ctx, &st.cert, &st.fp);
        report.identity_residual = Some(diagonal_identity_residual(&q, &st.fp.x_star, &st.ctx)?);
        stages.push(report);
        let y = apply_gamma(&st.ctx, &st.fp.x_star)?;
        let v = apply_j(&st.ctx, &st.fp.x_star)?;
        let u = compose(pt.gamma_b.dense(), y.dense());
        let mut diagnostics = diagnostics;
        // V = J_m B + J_k(B0 (I + Gamma_k X*))
        let alt = &pt.jm_b + &apply_j(&st.ctx, &(&pt.b0 + &(&pt.b0 * &y)))?;
        diagnostics.insert("v_closed_form".into(), (&v - &alt).hs() / b.hs());
        let result = finish(
            self.name(),
            problem,
            Assembly {
                u,
                v: v.into_dense(),
                m: Some(pt.m),
                k: Some(st.k),
                iterations: st.fp.iterations,
                contraction_q: st.fp.contraction_q,
                certificate_q: st.fp.certificate_q,
                x_star: st.fp.x_star,
                stage: st.ctx,
                stages,
                weights: st.weights,
                diagnostics,
            },
        )?;
        if opts.oracle {
            if let Some(a) = asym.as_mut() {
                attach_oracle(problem, a)?;
            }
        }
        Ok(PipelineRun { result, asymptotics: asym })
    }
}

/// Spectrum of `A - D`, one simple entry per basis vector.
pub fn derived_spectrum(spectrum: &Spectrum, diag: &[Complex64]) -> Result<Spectrum> {
    let lambda = spectrum.basis_values();
    let entries = (0..spectrum.dim())
        .map(|i| SpectralEntry { index: spectrum.label_of_basis(i), value: lambda[i] - diag[i], multiplicity: 1 })
        .collect();
    let derived = Spectrum::derived(spectrum.window(), entries)?;
    if derived.len() >= 2 {
        let sep = separation_delta(&derived)?;
        let scale = 1.0 + derived.max_modulus();
        if sep <= 1e-10 * scale {
            return Err(Error::AssumptionViolation(format!("derived spectrum separation {sep:e} is numerically zero")));
        }
    }
    Ok(derived)
}

/// Preliminary transform, then absorb the diagonal of `J_m B` into the free
/// operator and run a weighted stage in the eigenbasis of `A - J_m B`.
pub struct Mt4;

impl Pipeline for Mt4 {
    fn name(&self) -> &'static str {
        "mt4"
    }
    fn description(&self) -> &'static str {
        "preliminary transform, diagonal absorbed into A, weighted stage on the derived spectrum"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        if let Some(r) = zero_perturbation(self.name(), problem) {
            return Ok(PipelineRun { result: r?, asymptotics: None });
        }
        let b = &problem.perturbation;
        let d = problem.spectrum.dim();
        let pt = select_preliminary(b, &problem.spectrum, max_m(problem, opts))?;
        let mut stages = vec![StageReport::from_preliminary(&pt)];
        let diag: Vec<Complex64> = (0..d).map(|i| pt.jm_b.entry(i, i)).collect();
        let derived = Arc::new(derived_spectrum(&problem.spectrum, &diag)?);
        let dp = Arc::new(Partition::trivial(&derived));
        let mut rest = pt.jm_b.dense().clone();
        for i in 0..d {
            rest[(i, i)] = Complex64::new(0.0, 0.0);
        }
        let q = BlockMatrix::from_dense(&dp, pt.b0.dense() + rest)?;
        let dmat = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        let assembly = if q.hs() == 0.0 {
            stages.push(StageReport {
                name: "derived".into(),
                accepted: true,
                note: Some("zero remainder".into()),
                ..Default::default()
            });
            Assembly {
                u: pt.gamma_b.dense().clone(),
                v: dmat,
                x_star: BlockMatrix::zeros(&dp),
                m: Some(pt.m),
                k: None,
                iterations: 0,
                contraction_q: 0.0,
                certificate_q: 0.0,
                stage: TransformContext::trivial(&derived),
                stages,
                weights: None,
                diagnostics: BTreeMap::new(),
            }
        } else {
            let st = second_stage(&q, &derived, 0, opts)?;
            stages.push(StageReport::from_fixed_point("derived", &st.ctx, &st.cert, &st.fp));
            let y = apply_gamma(&st.ctx, &st.fp.x_star)?;
            let v = apply_j(&st.ctx, &st.fp.x_star)?;
            Assembly {
                u: compose(pt.gamma_b.dense(), y.dense()),
                v: dmat + v.dense(),
                m: Some(pt.m),
                k: Some(st.k),
                iterations: st.fp.iterations,
                contraction_q: st.fp.contraction_q,
                certificate_q: st.fp.certificate_q,
                x_star: st.fp.x_star,
                stage: st.ctx,
                stages,
                weights: st.weights,
                diagnostics: BTreeMap::new(),
            }
        };
        Ok(PipelineRun { result: finish(self.name(), problem, assembly)?, asymptotics: None })
    }
}

/// Tries each pipeline in turn and keeps the first whose certificates hold.
pub struct Auto {
    order: Vec<Arc<dyn Pipeline>>,
}

impl Auto {
    pub fn new(order: Vec<Arc<dyn Pipeline>>) -> Self {
        Auto { order }
    }
}

impl Pipeline for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }
    fn description(&self) -> &'static str {
        "escalates mt1, mt2, weighted, mt3, mt4 until one certifies"
    }
    fn run(&self, problem: &Problem, opts: &PipelineOptions) -> Result<PipelineRun> {
        let mut rejected = Vec::new();
        let mut last = None;
        for p in &self.order {
            match p.run(problem, opts) {
                Ok(mut run) => {
                    rejected.append(&mut run.result.stages);
                    run.result.stages = rejected;
                    return Ok(run);
                }
                Err(e) if e.is_method_condition() => {
                    rejected.push(StageReport::rejected(p.name(), &e));
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::NotSupported("no pipeline registered".into())))
    }
}

/// Pipelines registered by name.
#[derive(Clone)]
pub struct PipelineRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Pipeline>>,
}

impl PipelineRegistry {
    pub fn empty() -> Self {
        PipelineRegistry { entries: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        let order: Vec<Arc<dyn Pipeline>> =
            vec![Arc::new(Mt1), Arc::new(Mt2), Arc::new(Weighted), Arc::new(Mt3), Arc::new(Mt4)];
        for p in &order {
            r.register(p.clone());
        }
        r.register(Arc::new(Auto::new(order)));
        r
    }

    pub fn register(&mut self, p: Arc<dyn Pipeline>) {
        self.entries.insert(p.name(), p);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Pipeline>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("unknown pipeline '{name}' (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for PipelineRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
