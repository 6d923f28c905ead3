use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simop::models::{ModelInstance, ModelRegistry};
use simop::opmatrix::BlockMatrix;
use simop::similarity::{
    offdiagonal_norm, similarity_residual, PipelineRegistry, PipelineRun, Problem, SimilarityResult,
};
use simop::splitting::{split, split_system_solve};
use simop::transforms::{apply_gamma, apply_j, commutator_residual};
use simop::verify::{invariant_gates, oracle_eigs, spectrum_report, SpectrumReport, DEFAULT_ORACLE_CAP};
use simop::weighted::alpha_sequence;
use simop_oracle::{determinant_roots, eigenvalues, pairing_distance};

use crate::config::{LoadedConfig, RunConfig};
use crate::error::CliError;
use crate::plot::{self, Artifact};
use crate::report::{gate, to_value, Report, Timer};

/// Per-invocation switches that are not part of the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub timings: bool,
    /// Test hook: add this to one off-diagonal entry of `V` before the gates run.
    pub corrupt_v: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Split,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Split => "split",
            Command::Verify => "verify",
        }
    }
}

pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
    pub exit_code: i32,
}

pub const DUAL_ORACLE_SAMPLES: usize = 100;
pub const DUAL_ORACLE_TOL: f64 = 1e-10;

struct Session<'a> {
    cfg: &'a RunConfig,
    opts: &'a RunOptions,
    report: Report,
    artifacts: Vec<Artifact>,
    timer: Timer,
}

pub fn run(cmd: Command, loaded: &LoadedConfig, opts: &RunOptions) -> Outcome {
    let cfg = &loaded.config;
    let mut s = Session {
        cfg,
        opts,
        report: Report::new(cfg, cmd.name(), opts.seed),
        artifacts: Vec::new(),
        timer: Timer::new(opts.timings),
    };
    let result = match cmd {
        Command::Analyze if cfg.pipeline == "split" => s.split(loaded),
        Command::Analyze => s.analyze(loaded),
        Command::Split => s.split(loaded),
        Command::Verify => s.verify(loaded),
    };
    let exit_code = match result {
        Ok(()) => {
            let failed = s.report.failed_gates();
            if failed.is_empty() {
                0
            } else {
                let e = CliError::Invariant(format!("invariant gates failed: {}", failed.join(", ")));
                s.report.pipeline.error = Some(e.to_report());
                e.exit_code()
            }
        }
        Err(e) => {
            s.report.pipeline.error = Some(e.to_report());
            e.exit_code()
        }
    };
    s.report.pipeline.exit_code = exit_code;
    s.report.pipeline.passed = exit_code == 0;
    s.report.timings = s.timer.finish();
    Outcome { report: s.report, artifacts: s.artifacts, exit_code }
}

/// Write the JSON report and plot files below `out_dir`.
pub fn write_outputs(outcome: &Outcome, cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Invariant(format!("cannot write output: {e}"));
    let report = out_dir.join(&cfg.output.report);
    if let Some(dir) = report.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(&report, outcome.report.to_json()).map_err(io)?;
    if !outcome.artifacts.is_empty() {
        let dir = out_dir.join(&cfg.output.csv_dir);
        fs::create_dir_all(&dir).map_err(io)?;
        for (name, text) in &outcome.artifacts {
            fs::write(dir.join(name), text).map_err(io)?;
        }
    }
    Ok(())
}

impl Session<'_> {
    fn build(&mut self, loaded: &LoadedConfig) -> Result<ModelInstance, CliError> {
        let params = self.cfg.model_params(&loaded.base_dir, self.opts.seed)?;
        let family = ModelRegistry::builtin().get(&self.cfg.model.family)?;
        let inst = self.timer.time("build", || family.build(&params))?;
        self.report.pipeline.dim = Some(inst.problem.spectrum().dim());
        self.report.pipeline.model_info = inst.info.clone();
        Ok(inst)
    }

    fn run_pipeline(&mut self, inst: &ModelInstance) -> Result<PipelineRun, CliError> {
        let name = if self.cfg.pipeline == "split" { "auto" } else { self.cfg.pipeline.as_str() };
        let pipeline = PipelineRegistry::builtin().get(name)?;
        let options = self.cfg.options();
        let mut run = self.timer.time("pipeline", || pipeline.run(&inst.problem, &options))?;
        if let Some(eps) = self.opts.corrupt_v {
            corrupt(&inst.problem, &mut run.result, eps)?;
        }
        let r = &run.result;
        let p = &mut self.report.pipeline;
        p.selected = Some(r.pipeline.clone());
        p.m = r.m;
        p.k = r.k.map(|k| k as i64);
        p.iterations = Some(r.iterations);
        p.contraction_q = Some(r.contraction_q);
        p.certificate_q = Some(r.certificate_q);
        p.residual_similarity = Some(r.residual.full);
        p.residual_interior = Some(r.residual.interior);
        p.residual_offdiag_v = Some(r.residual_offdiag_v);
        p.condition = r.condition;
        p.diagnostics = r.diagnostics.clone();
        self.report.stages = r.stages.clone();
        for s in r.stages.iter().filter(|s| s.accepted) {
            if let Some(q) = s.certificate_q {
                let mut c = BTreeMap::new();
                c.insert("certificate_q".to_string(), to_value(&q));
                c.insert("holds".to_string(), to_value(&(q < 1.0)));
                c.insert("norm".to_string(), to_value(&s.norm));
                c.insert("gamma".to_string(), to_value(&s.gamma));
                c.insert("perturbation_norm".to_string(), to_value(&s.perturbation_norm));
                self.report.certificates.insert(s.name.clone(), to_value(&c));
            }
        }
        if let Some(w) = &r.weights {
            let mut c = BTreeMap::new();
            c.insert("sqrt_eta", w.sqrt_eta());
            c.insert("source_norm", w.source_norm());
            self.report.certificates.insert("weights".into(), to_value(&c));
        }
        Ok(run)
    }

    fn gates(&mut self, problem: &Problem, result: &SimilarityResult) -> Result<(), CliError> {
        let gates = if self.cfg.oracle {
            self.timer.time("gates", || invariant_gates(problem, result))?
        } else {
            let scale = result.residual.scale.max(1.0);
            let hv = result.v.hs().max(f64::MIN_POSITIVE);
            vec![
                gate("similarity_residual", result.residual_similarity, 1e-9 * scale),
                gate("offdiagonal_v", result.residual_offdiag_v, 1e-10 * hv),
            ]
        };
        self.report.invariant_gates.extend(gates);
        Ok(())
    }

    fn plots(&mut self, problem: &Problem, sr: Option<&SpectrumReport>) -> Result<(), CliError> {
        if let Some(sr) = sr {
            self.artifacts.push(plot::spectrum_csv(sr)?);
            self.artifacts.push(plot::b_decay_csv(sr)?);
            if self.cfg.output.svg {
                self.artifacts.push(plot::spectrum_svg(sr));
            }
        }
        if let Ok(w) = alpha_sequence(problem.perturbation(), &problem.trivial_context()) {
            self.artifacts.push(plot::alpha_csv(&w)?);
        }
        Ok(())
    }

    fn analyze(&mut self, loaded: &LoadedConfig) -> Result<(), CliError> {
        let inst = self.build(loaded)?;
        let run = self.run_pipeline(&inst)?;
        let sr = if self.cfg.oracle {
            let sr =
                self.timer.time("oracle", || spectrum_report(&inst.problem, &run.result, run.asymptotics.as_ref()))?;
            self.report.spectrum_report = Some(to_value(&sr));
            Some(sr)
        } else {
            None
        };
        self.gates(&inst.problem, &run.result)?;
        self.plots(&inst.problem, sr.as_ref())
    }

    fn split(&mut self, loaded: &LoadedConfig) -> Result<(), CliError> {
        let inst = self.build(loaded)?;
        let problem = &inst.problem;
        let spec = problem.spectrum();
        let k = self.cfg.split_k.ok_or_else(|| CliError::Input("split needs split_k in the config".into()))?;
        let pos = spec.position(k).ok_or_else(|| CliError::Input(format!("split_k = {k} is outside the window")))?;
        let mult = spec.entries()[pos].multiplicity;
        if mult != 1 {
            return Err(CliError::Input(format!("split needs a simple eigenvalue; label {k} has multiplicity {mult}")));
        }
        self.report.pipeline.selected = Some("split".into());
        self.report.pipeline.k = Some(k);
        let tol = self.cfg.tolerances.tol;
        let max_iter = self.cfg.tolerances.max_iter;
        let res = self.timer.time("split", || split(problem, k, tol, max_iter))?;
        self.report.pipeline.iterations = Some(res.iterations);
        self.report.certificates.insert("mt6".into(), to_value(&res.certificate));
        self.report.certificates.insert("splitting".into(), to_value(&res));

        let tiny = |b: f64| b * (1.0 + 1e-9) + 1e-15;
        self.report.invariant_gates.push(gate("split_eigen_residual", res.eigen_residual, 1e-9));
        self.report.invariant_gates.push(gate("split_b2_bound", res.b2.norm(), tiny(res.bound_b2)));
        self.report.invariant_gates.push(gate("split_eigenvector_bound", res.e_shift, tiny(res.bound_e)));

        match self.timer.time("split_system", || split_system_solve(spec, problem.perturbation(), k, tol, max_iter)) {
            Ok(sys) => {
                let worst = sys.equation_residuals.iter().copied().fold(0.0, f64::max);
                let scale = problem.perturbation().hs().max(1.0);
                self.report.invariant_gates.push(gate("split_block_equations", worst, 1e-9 * scale));
                self.report.certificates.insert(
                    "split_system".into(),
                    serde_json::json!({
                        "iterations": sys.iterations,
                        "contraction_q": sys.contraction_q,
                        "certificate_q": sys.certificate_q,
                        "equation_residuals": sys.equation_residuals,
                    }),
                );
            }
            Err(e) => {
                self.report.certificates.insert("split_system".into(), serde_json::json!({ "skipped": e.to_string() }));
            }
        }

        if self.cfg.oracle {
            let eig = self.timer.time("oracle", || oracle_eigs(&problem.assembled(), DEFAULT_ORACLE_CAP))?;
            let nearest = eig
                .iter()
                .copied()
                .min_by(|a, b| (a - res.lambda_prime).norm().total_cmp(&(b - res.lambda_prime).norm()))
                .unwrap_or_default();
            let distance = (nearest - res.lambda_prime).norm();
            let shift = (nearest - (res.lambda - res.b1)).norm();
            self.report.spectrum_report = Some(serde_json::json!({
                "k": k,
                "lambda": res.lambda,
                "lambda_prime": res.lambda_prime,
                "oracle_nearest": nearest,
                "oracle_distance": distance,
                "oracle_shift_from_first_order": shift,
                "bound_b2": res.bound_b2,
            }));
            self.report.invariant_gates.push(gate(
                "split_oracle_agreement",
                distance,
                1e-8 * (1.0 + spec.max_modulus()),
            ));
        }
        Ok(())
    }

    fn verify(&mut self, loaded: &LoadedConfig) -> Result<(), CliError> {
        if !self.cfg.oracle {
            return Err(CliError::Input("verify needs the oracle enabled".into()));
        }
        self.dual_oracle()?;
        if self.cfg.pipeline == "split" {
            self.split(loaded)?;
        } else {
            self.analyze(loaded)?;
        }
        let inst = self.build(loaded)?;
        self.transform_properties(&inst.problem)
    }

    /// QR against determinant roots on seeded random matrices of dimension 1..=8.
    fn dual_oracle(&mut self) -> Result<(), CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let mut worst = 0.0f64;
        self.timer.time("dual_oracle", || -> Result<(), CliError> {
            for _ in 0..DUAL_ORACLE_SAMPLES {
                let d = rng.random_range(1..=simop_oracle::DUAL_ORACLE_MAX_DIM);
                let m = DMatrix::from_fn(d, d, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let qr = eigenvalues(&m)?;
                let roots = determinant_roots(&m)?;
                worst = worst.max(pairing_distance(&qr, &roots) / m.norm().max(1.0));
            }
            Ok(())
        })?;
        let g = gate("dual_oracle_agreement", worst, DUAL_ORACLE_TOL);
        let pass = g.pass;
        self.report.invariant_gates.push(g);
        if !pass {
            return Err(CliError::Oracle(format!("QR and determinant-root oracles disagree by {worst:e}")));
        }
        Ok(())
    }

    /// `ad_A(Gamma X) = X - J X`, `J Gamma X = 0` and `J J X = J X` for `B`
    /// and for a seeded random `X`.
    fn transform_properties(&mut self, problem: &Problem) -> Result<(), CliError> {
        let ctx = problem.trivial_context();
        let b = problem.perturbation();
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x5eed);
        let d = b.dim();
        let x = BlockMatrix::from_dense(
            b.partition(),
            DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        )?;
        for (tag, m) in [("b", b), ("random", &x)] {
            let scale = 1e-10 * (1.0 + m.hs() * (1.0 + problem.spectrum().max_modulus()));
            let comm = commutator_residual(&ctx, m)?;
            let g = apply_gamma(&ctx, m)?;
            let jg = apply_j(&ctx, &g)?.hs();
            let j = apply_j(&ctx, m)?;
            let jj = (&apply_j(&ctx, &j)? - &j).hs();
            self.report.invariant_gates.push(gate(&format!("commutator_{tag}"), comm, scale));
            self.report.invariant_gates.push(gate(&format!("j_gamma_vanishes_{tag}"), jg, 1e-14 * (1.0 + m.hs())));
            self.report.invariant_gates.push(gate(&format!("j_idempotent_{tag}"), jj, 0.0));
        }
        Ok(())
    }
}

/// Perturb `V` off its block diagonal and refresh the residuals the gates read.
fn corrupt(problem: &Problem, result: &mut SimilarityResult, eps: f64) -> Result<(), CliError> {
    let d = result.v.dim();
    if d < 2 {
        return Err(CliError::Usage("corrupt-v needs a window of dimension at least 2".into()));
    }
    let groups = result.stage.partition().basis_groups().to_vec();
    let j = (1..d).find(|&j| groups[j] != groups[0]).unwrap_or(1);
    result.v.dense_mut()[(0, j)] += Complex64::new(eps, 0.0);
    let residual = similarity_residual(problem.spectrum(), problem.perturbation(), &result.u, &result.v)?;
    result.residual_similarity = residual.full;
    result.residual = residual;
    result.residual_offdiag_v = offdiagonal_norm(&groups, result.v.dense());
    Ok(())
}
