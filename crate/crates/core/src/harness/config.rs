//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseSchedule, RateFn};
use crate::weights::Backend;

/// A single value or a list, so that `"window": 2000` and
/// `"window": [500, 2000]` both parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    #[default]
    Constant,
    Sinusoid,
}

/// Which qubits follow the time-dependent part of the schedule; the others
/// stay at `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Targets {
    #[default]
    All,
    Data,
    Ancilla,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(rename = "type", default)]
    pub kind: ScheduleKind,
    pub gamma0: f64,
    #[serde(default)]
    pub amplitude: f64,
    /// Radians per cycle.
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub targets: Targets,
}

impl ScheduleSpec {
    pub fn constant(gamma0: f64) -> Self {
        Self { kind: ScheduleKind::Constant, gamma0, amplitude: 0.0, omega: 0.0, phase: 0.0, targets: Targets::All }
    }

    pub fn to_schedule(&self, d: usize) -> Result<NoiseSchedule> {
        let flat = RateFn::Constant { gamma0: self.gamma0 };
        let varying = match self.kind {
            ScheduleKind::Constant => flat,
            ScheduleKind::Sinusoid => RateFn::Sinusoid {
                gamma0: self.gamma0,
                amplitude: self.amplitude,
                omega: self.omega,
                phase: self.phase,
            },
        };
        let (data, ancilla) = match self.targets {
            Targets::All => (varying, varying),
            Targets::Data => (varying, flat),
            Targets::Ancilla => (flat, varying),
        };
        NoiseSchedule::split(d, data, ancilla)
    }
}

fn default_lag() -> usize {
    1
}
fn default_rounds_test() -> usize {
    100
}
fn default_trials() -> usize {
    2000
}
fn default_z() -> f64 {
    2.0
}
fn default_backend() -> Backend {
    Backend::Exact
}

/// Full description of a training/testing experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(default = "default_lag")]
    pub lag: usize,
    /// Cycles per testing trial.
    #[serde(default = "default_rounds_test")]
    pub rounds_test: usize,
    pub schedule: ScheduleSpec,
    /// Sliding-window length(s) in cycles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<OneOrMany>,
    /// Training length(s) in cycles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_train: Option<OneOrMany>,
    /// Training stages per data point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    /// Testing trials per logical-error-rate measurement.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default)]
    pub seed: u64,
    /// Train on the true probabilities instead of the estimator.
    #[serde(default)]
    pub oracle_training: bool,
    /// First evaluation cycle of the fluctuation experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_start: Option<usize>,
    /// Last evaluation cycle (inclusive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_N_GRID: [usize; 6] = [100, 316, 1000, 3162, 10000, 31623];
pub const DEFAULT_WINDOWS: [usize; 3] = [500, 2000, 16000];
pub const DEFAULT_CONVERGENCE_REPETITIONS: usize = 400;
pub const DEFAULT_FLUCTUATION_REPETITIONS: usize = 200;
pub const MIN_TRIALS: usize = 100;

/// Reference schema printed by the CLI on usage errors.
pub const SCHEMA: &str = r#"{
  "d": 3,                      odd code distance >= 3
  "lag": 1,                    detector lag, 1 or 2
  "rounds_test": 100,          cycles per testing trial
  "schedule": {
    "type": "constant",        constant | sinusoid
    "gamma0": 0.005,
    "amplitude": 0.0,          sinusoid only
    "omega": 0.0,              radians per cycle
    "phase": 0.0,
    "targets": "all"           all | data | ancilla
  },
  "window": 2000,              cycles, or a list of windows
  "n_train": [100, 1000],      cycles, or a single value
  "repetitions": 50,           training stages per point
  "trials": 2000,              testing trials per measurement (>= 100)
  "z": 2.0,                    significance threshold
  "backend": "exact",          exact | dijkstra
  "seed": 0,                   master seed
  "oracle_training": false,    optional
  "eval_start": 20000,         optional, fluctuation experiment
  "eval_end": 39000,
  "eval_step": 1000,
  "out": "out.csv"             optional
}"#;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        crate::dem::validate_shape(self.d, self.rounds_test, self.lag)?;
        if self.rounds_test < 10 {
            return Err(Error::Config("rounds_test must be at least 10".into()));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("trials must be at least {MIN_TRIALS}")));
        }
        if self.repetitions == Some(0) {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::Config("z must be a non-negative number".into()));
        }
        for (name, list) in [("window", &self.window), ("n_train", &self.n_train)] {
            if let Some(v) = list {
                let v = v.to_vec();
                if v.is_empty() || v.contains(&0) {
                    return Err(Error::Config(format!("{name} values must be positive")));
                }
            }
        }
        if let Some(w) = &self.window {
            if w.to_vec().iter().any(|&w| w <= self.lag) {
                return Err(Error::Config("window must exceed the lag".into()));
            }
        }
        if self.eval_step == Some(0) {
            return Err(Error::Config("eval_step must be positive".into()));
        }
        self.schedule.to_schedule(self.d)?.validate(0, 1)?;
        Ok(())
    }

    pub fn noise(&self) -> Result<NoiseSchedule> {
        self.schedule.to_schedule(self.d)
    }

    pub fn n_grid(&self) -> Vec<usize> {
        self.n_train.as_ref().map_or_else(|| DEFAULT_N_GRID.to_vec(), OneOrMany::to_vec)
    }

    pub fn windows(&self) -> Vec<usize> {
        self.window.as_ref().map_or_else(|| DEFAULT_WINDOWS.to_vec(), OneOrMany::to_vec)
    }
}
