use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use simop::similarity::StageReport;
use simop::verify::InvariantGate;

use crate::config::RunConfig;
use crate::error::ErrorReport;

/// Top-level JSON report. Field order is fixed by declaration order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config_echo: RunConfig,
    pub pipeline: PipelineSection,
    pub stages: Vec<StageReport>,
    pub spectrum_report: Option<Value>,
    pub certificates: BTreeMap<String, Value>,
    pub invariant_gates: Vec<InvariantGate>,
    pub timings: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineSection {
    pub command: &'static str,
    pub requested: String,
    pub selected: Option<String>,
    pub family: String,
    pub seed: u64,
    pub dim: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<i64>,
    pub iterations: Option<usize>,
    pub contraction_q: Option<f64>,
    pub certificate_q: Option<f64>,
    pub residual_similarity: Option<f64>,
    pub residual_interior: Option<f64>,
    pub residual_offdiag_v: Option<f64>,
    pub condition: Option<f64>,
    pub model_info: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub passed: bool,
    pub exit_code: i32,
    pub error: Option<ErrorReport>,
}

impl Report {
    pub fn new(config: &RunConfig, command: &'static str, seed: u64) -> Self {
        Report {
            config_echo: config.clone(),
            pipeline: PipelineSection {
                command,
                requested: config.pipeline.clone(),
                family: config.model.family.clone(),
                seed,
                ..Default::default()
            },
            stages: Vec::new(),
            spectrum_report: None,
            certificates: BTreeMap::new(),
            invariant_gates: Vec::new(),
            timings: None,
        }
    }

    pub fn failed_gates(&self) -> Vec<&str> {
        self.invariant_gates.iter().filter(|g| !g.pass).map(|g| g.name.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Wall-clock phases, recorded only when asked for so reports stay reproducible.
pub struct Timer {
    enabled: bool,
    phases: BTreeMap<String, f64>,
}

impl Timer {
    pub fn new(enabled: bool) -> Self {
        Timer { enabled, phases: BTreeMap::new() }
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            *self.phases.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64();
        }
        out
    }

    pub fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.enabled.then_some(self.phases)
    }
}

pub fn gate(name: &str, value: f64, threshold: f64) -> InvariantGate {
    InvariantGate { name: name.to_string(), value, threshold, pass: value <= threshold }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("value serializes")
}
