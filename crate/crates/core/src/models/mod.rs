//! Example operator families, each producing a spectrum and a perturbation
//! from Fourier data.

mod coefficients;
mod dirac;
mod hill;
mod involution;
mod kernel;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use coefficients::{
    coefficient, l2_norm_sqr, parse_coefficients, parse_kernel_coefficients, parse_matrix_coefficients,
    random_trig_poly, support_radius, Coefficients, KernelCoefficients,
};
pub use dirac::{build_dirac, build_dirac_spectrum, default_grid_points, DiracModel};
pub use hill::{build_hill, build_hill_spectrum, hill_q_derived, hill_q_display};
pub use involution::{
    build_involution_perturbation, involution_inequality_lhs, involution_p, involution_q, phase_coefficient,
    tilde_coefficient,
};
pub use kernel::{build_first_derivative, build_integral_perturbation, kernel_from_map, s_plus_t};

use crate::error::{Error, Result};
use crate::opmatrix::TruncationWindow;
use crate::similarity::Problem;

pub(crate) fn check_theta(theta: f64, lo: f64, hi: f64, closed_lo: bool) -> Result<()> {
    let ok = theta.is_finite() && theta < hi && (theta > lo || (closed_lo && theta == lo));
    if ok {
        Ok(())
    } else {
        let open = if closed_lo { "[" } else { "(" };
        Err(Error::invalid(format!("theta = {theta} not in {open}{lo}, {hi})")))
    }
}

#[derive(Debug, Clone)]
pub enum ModelData {
    None,
    Builtin(String),
    Coefficients(Coefficients),
    Kernel(KernelCoefficients),
    Matrix(Box<[Coefficients; 4]>),
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub theta: f64,
    pub window: TruncationWindow,
    pub data: ModelData,
    pub grid_points: Option<usize>,
    /// Dirac only: analyse the reduced perturbation instead of the original.
    pub reduced: bool,
}

impl ModelParams {
    pub fn new(window: TruncationWindow, data: ModelData) -> Self {
        ModelParams { theta: 0.0, window, data, grid_points: None, reduced: true }
    }
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub family: &'static str,
    pub problem: Problem,
    /// The other form of the operator when the family has two (Dirac).
    pub companion: Option<Problem>,
    pub default_pipeline: &'static str,
    pub info: BTreeMap<String, f64>,
}

pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn default_pipeline(&self) -> &'static str;
    fn build(&self, params: &ModelParams) -> Result<ModelInstance>;
}

fn instance(family: &dyn ModelFamily, problem: Problem) -> ModelInstance {
    ModelInstance {
        family: family.name(),
        problem,
        companion: None,
        default_pipeline: family.default_pipeline(),
        info: BTreeMap::new(),
    }
}

fn wrong_data(family: &str, want: &str) -> Error {
    Error::invalid(format!("family '{family}' expects {want}"))
}

/// `d/dt` perturbed by an integral operator.
pub struct FirstDerivativeIntegral;

impl ModelFamily for FirstDerivativeIntegral {
    fn name(&self) -> &'static str {
        "first_derivative_integral"
    }
    fn default_pipeline(&self) -> &'static str {
        "mt1"
    }
    fn build(&self, params: &ModelParams) -> Result<ModelInstance> {
        let spec = Arc::new(build_first_derivative(params.theta, params.window)?);
        let b = match &params.data {
            ModelData::Builtin(name) if name == "s_plus_t" => build_integral_perturbation(&spec, s_plus_t)?,
            ModelData::Builtin(name) => return Err(Error::invalid(format!("unknown built-in kernel '{name}'"))),
            ModelData::Kernel(map) => build_integral_perturbation(&spec, kernel_from_map(map))?,
            ModelData::None => build_integral_perturbation(&spec, |_, _| Default::default())?,
            _ => return Err(wrong_data(self.name(), "kernel coefficients or a built-in kernel")),
        };
        Ok(instance(self, Problem::new(spec, b.into_dense())?))
    }
}

/// `d/dt` perturbed by `v(t) x(1 - t)`.
pub struct Involution;

impl ModelFamily for Involution {
    fn name(&self) -> &'static str {
        "involution"
    }
    fn default_pipeline(&self) -> &'static str {
        "mt3"
    }
    fn build(&self, params: &ModelParams) -> Result<ModelInstance> {
        let v = match &params.data {
            ModelData::Coefficients(c) => c.clone(),
            ModelData::None => Coefficients::new(),
            _ => return Err(wrong_data(self.name(), "one-index coefficients")),
        };
        let spec = Arc::new(build_first_derivative(params.theta, params.window)?);
        let b = build_involution_perturbation(&spec, &v, params.theta)?;
        let mut inst = instance(self, Problem::new(spec, b.into_dense())?);
        inst.info.insert("v_norm_sqr".into(), l2_norm_sqr(&v));
        Ok(inst)
    }
}

/// Periodic one-dimensional Dirac operator with a 2x2 matrix potential.
pub struct Dirac;

impl ModelFamily for Dirac {
    fn name(&self) -> &'static str {
        "dirac"
    }
    fn default_pipeline(&self) -> &'static str {
        "mt4"
    }
    fn build(&self, params: &ModelParams) -> Result<ModelInstance> {
        if params.theta != 0.0 {
            return Err(Error::NotSupported("the Dirac family uses periodic boundary conditions (theta = 0)".into()));
        }
        let v: [Coefficients; 4] = match &params.data {
            ModelData::Matrix(m) => (**m).clone(),
            ModelData::None => Default::default(),
            _ => return Err(wrong_data(self.name(), "four coefficient families")),
        };
        let grid = params.grid_points.unwrap_or_else(|| default_grid_points(params.window, &v));
        let model = build_dirac(&v, params.window, grid)?;
        let spec = Arc::new(model.spectrum);
        let reduced = Problem::new(spec.clone(), model.b_tilde.into_dense())?;
        let original = Problem::new(spec, model.b.into_dense())?;
        let (main, other) = if params.reduced { (reduced, original) } else { (original, reduced) };
        let mut inst = instance(self, main);
        inst.companion = Some(other);
        inst.info.insert("grid_points".into(), grid as f64);
        Ok(inst)
    }
}

/// `-d^2/dt^2` with quasi-periodic conditions and a potential.
pub struct Hill;

impl ModelFamily for Hill {
    fn name(&self) -> &'static str {
        "hill"
    }
    fn default_pipeline(&self) -> &'static str {
        "mt3"
    }
    fn build(&self, params: &ModelParams) -> Result<ModelInstance> {
        let v = match &params.data {
            ModelData::Coefficients(c) => c.clone(),
            ModelData::None => Coefficients::new(),
            _ => return Err(wrong_data(self.name(), "one-index coefficients")),
        };
        let (spec, b) = build_hill(params.theta, &v, params.window)?;
        let mut inst = instance(self, Problem::new(Arc::new(spec), b.into_dense())?);
        inst.info.insert("v_norm_sqr".into(), l2_norm_sqr(&v));
        Ok(inst)
    }
}

#[derive(Clone)]
pub struct ModelRegistry {
    entries: BTreeMap<&'static str, Arc<dyn ModelFamily>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry { entries: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(FirstDerivativeIntegral));
        r.register(Arc::new(Involution));
        r.register(Arc::new(Dirac));
        r.register(Arc::new(Hill));
        r
    }

    pub fn register(&mut self, f: Arc<dyn ModelFamily>) {
        self.entries.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ModelFamily>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::invalid(format!("unknown model family '{name}' (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
