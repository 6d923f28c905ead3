use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use simop::models::{
    parse_coefficients, parse_kernel_coefficients, parse_matrix_coefficients, random_trig_poly, ModelData, ModelParams,
};
use simop::opmatrix::TruncationWindow;
use simop::similarity::PipelineOptions;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub truncation: Truncation,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_pipeline")]
    pub pipeline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_k: Option<i64>,
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// CSV path, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
    /// Random trigonometric polynomial drawn from `--seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default = "yes")]
    pub reduced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub degree: i64,
    #[serde(default = "yes")]
    pub real: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_interior")]
    pub interior_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_margin")]
    pub contraction_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: default_tol(), max_iter: default_max_iter(), contraction_margin: default_margin() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_csv_dir")]
    pub csv_dir: PathBuf,
    #[serde(default)]
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output { report: default_report(), csv_dir: default_csv_dir(), svg: false }
    }
}

fn yes() -> bool {
    true
}
fn default_pipeline() -> String {
    "auto".into()
}
fn default_interior() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    200
}
fn default_margin() -> f64 {
    0.99
}
fn default_report() -> PathBuf {
    "report.json".into()
}
fn default_csv_dir() -> PathBuf {
    "csv".into()
}

pub const PIPELINES: [&str; 7] = ["auto", "mt1", "mt2", "weighted", "mt3", "mt4", "split"];

/// A parsed config together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("config line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let t = &self.tolerances;
        if !(t.tol > 0.0 && t.tol.is_finite()) || t.max_iter == 0 || !(t.contraction_margin > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !PIPELINES.contains(&self.pipeline.as_str()) {
            return bad(format!("unknown pipeline '{}' (known: {})", self.pipeline, PIPELINES.join(", ")));
        }
        if self.pipeline == "split" && self.split_k.is_none() {
            return bad("pipeline 'split' needs split_k".into());
        }
        let sources = [self.model.builtin.is_some(), self.model.coefficients.is_some(), self.model.random.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return bad("model takes at most one of builtin, coefficients, random".into());
        }
        Ok(())
    }

    pub fn window(&self) -> Result<TruncationWindow, CliError> {
        Ok(TruncationWindow::new(self.truncation.n, self.truncation.interior_fraction)?)
    }

    pub fn options(&self) -> PipelineOptions {
        PipelineOptions {
            tol: self.tolerances.tol,
            max_iter: self.tolerances.max_iter,
            contraction_margin: self.tolerances.contraction_margin,
            max_preliminary_m: None,
            oracle: self.oracle,
        }
    }

    /// Model parameters with coefficient files read and random data drawn.
    pub fn model_params(&self, base_dir: &Path, seed: u64) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let data = if let Some(name) = &m.builtin {
            ModelData::Builtin(name.clone())
        } else if let Some(path) = &m.coefficients {
            let path = base_dir.join(path);
            let file =
                fs::File::open(&path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
            match m.family.as_str() {
                "first_derivative_integral" => ModelData::Kernel(parse_kernel_coefficients(file)?),
                "dirac" => ModelData::Matrix(Box::new(parse_matrix_coefficients(file)?)),
                _ => ModelData::Coefficients(parse_coefficients(file)?),
            }
        } else if let Some(r) = m.random {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ModelData::Coefficients(random_trig_poly(&mut rng, r.degree, r.real))
        } else {
            ModelData::None
        };
        let mut params = ModelParams::new(self.window()?, data);
        params.theta = m.theta;
        params.grid_points = m.grid_points;
        params.reduced = m.reduced;
        Ok(params)
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let config = RunConfig::from_json(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}
