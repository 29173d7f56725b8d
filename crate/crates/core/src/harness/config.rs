//! Run and sweep configuration files.
//!
//! Configurations are strict JSON: unknown keys are rejected and every
//! problem is reported with the path of the offending key. The SHA-256 hash
//! of the canonical form (sorted keys, defaults filled in) identifies a
//! configuration in every artifact.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::energetics::{make_model, ModelSpec};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Grid};
use crate::solver::{initialize, BcOrder, InitialSpec, PhaseField, Problem, SnapshotPolicy};

/// One simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub model: ModelSpec,
    /// Interface width, in `(0, 1)`.
    pub epsilon: f64,
    pub t_final: f64,
    /// Macro time step; the stability cap when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_snapshots")]
    pub snapshots: SnapshotPolicy,
    #[serde(default = "default_initial")]
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
    /// Declared energy bound; the initial energy when absent.
    #[serde(default)]
    pub e0: Option<f64>,
    #[serde(default)]
    pub bc_order: BcOrder,
}

fn default_snapshots() -> SnapshotPolicy {
    SnapshotPolicy::Every { steps: 10 }
}

fn default_initial() -> InitialSpec {
    InitialSpec::RandomSeeded { amplitude: 0.05, mean: 0.0 }
}

/// Analysis settings of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAnalysis {
    /// Time at which trends are tabulated.
    #[serde(default = "default_eval_time")]
    pub eval_time: f64,
    /// Collar width for the tubular mass.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Kernel centres and terminal times for the monotonicity fit.
    #[serde(default)]
    pub kernels: Vec<KernelConfig>,
}

impl Default for SweepAnalysis {
    fn default() -> Self {
        Self { eval_time: default_eval_time(), delta: default_delta(), kernels: Vec::new() }
    }
}

fn default_eval_time() -> f64 {
    0.05
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub center: [f64; 2],
    pub terminal: f64,
}

/// A family of runs that differ only in `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Multiply every cell count by `refine[i]` for the `i`-th run.
    #[serde(default)]
    pub refine: Option<Vec<usize>>,
    #[serde(default)]
    pub analysis: SweepAnalysis,
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

fn parse_strict<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = parse_strict(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(config_error("epsilon", format!("{} is outside the open interval (0, 1)", self.epsilon)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(config_error("t_final", format!("{} must be positive", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(config_error("dt", format!("{dt} must be positive")));
            }
        }
        if let Some(e0) = self.e0 {
            if !(e0 > 0.0) {
                return Err(config_error("e0", format!("{e0} must be positive")));
            }
        }
        Grid::new(&self.domain).map_err(|e| config_error("domain", e.to_string()))?;
        make_model(&self.model).map_err(|e| config_error("model", e.to_string()))?;
        Ok(())
    }

    /// Canonical JSON: sorted keys, defaults filled in, no whitespace.
    pub fn canonical_json(&self) -> String {
        canonical(&serde_json::to_value(self).expect("config serialises"))
    }

    /// Hex SHA-256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Hash of the configuration without `t_final` and `snapshots`.
    ///
    /// Two configurations with the same trajectory hash produce the same
    /// states at the same steps, so a checkpoint of one can resume the other.
    pub fn trajectory_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Value::Object(m) = &mut v {
            m.remove("t_final");
            m.remove("snapshots");
        }
        hex::encode(Sha256::digest(canonical(&v).as_bytes()))
    }

    /// Pretty JSON echo with defaults applied.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(&sort_value(&serde_json::to_value(self).expect("config serialises")))
            .expect("value serialises")
    }

    pub fn problem(&self) -> Result<Arc<Problem>> {
        let grid = Grid::new(&self.domain)?;
        let model = make_model(&self.model)?;
        Problem::new(grid, model, self.epsilon, self.bc_order)
    }

    pub fn initial_field(&self, problem: &Arc<Problem>) -> Result<PhaseField> {
        initialize(problem, &self.initial, self.seed)
    }

    /// Macro step: the configured one, or the stability cap.
    pub fn time_step(&self, problem: &Problem) -> Result<f64> {
        let cap = problem.stability_cap();
        match self.dt {
            None => Ok(cap),
            Some(dt) if dt <= cap * (1.0 + 1e-12) => Ok(dt),
            Some(dt) => Err(config_error("dt", format!("{dt} exceeds the stability cap {cap}"))),
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = parse_strict(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(config_error("epsilons", "at least one value is needed"));
        }
        for (i, w) in self.epsilons.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                return Err(config_error(
                    format!("epsilons[{}]", i + 1),
                    format!("values must be strictly decreasing, got {} after {}", w[1], w[0]),
                ));
            }
        }
        if let Some(r) = &self.refine {
            if r.len() != self.epsilons.len() || r.contains(&0) {
                return Err(config_error("refine", "needs one positive factor per epsilon"));
            }
        }
        for i in 0..self.epsilons.len() {
            self.run_config(i).validate()?;
        }
        Ok(())
    }

    /// Configuration of the `i`-th run.
    pub fn run_config(&self, i: usize) -> RunConfig {
        let mut cfg = self.base.clone();
        cfg.epsilon = self.epsilons[i];
        if let Some(r) = &self.refine {
            cfg.domain = cfg.domain.refined(r[i]);
        }
        cfg
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(canonical(&serde_json::to_value(self).expect("config serialises")).as_bytes()))
    }
}

fn sort_value(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<_, _> = m.iter().map(|(k, v)| (k.clone(), sort_value(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.iter().map(sort_value).collect()),
        other => other.clone(),
    }
}

/// Serialises a JSON value with object keys in sorted order.
pub fn canonical(v: &Value) -> String {
    fn write(v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                let sorted: BTreeMap<_, _> = m.iter().collect();
                out.push('{');
                for (i, (k, v)) in sorted.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(k).expect("string serialises"));
                    out.push(':');
                    write(v, out);
                }
                out.push('}');
            }
            Value::Array(a) => {
                out.push('[');
                for (i, v) in a.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(v, out);
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut out = String::new();
    write(v, &mut out);
    out
}
