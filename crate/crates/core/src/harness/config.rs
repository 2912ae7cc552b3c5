//! Experiment configuration: JSON file, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::Gate;
use crate::device::{DeviceParams, WindowSpec};
use crate::mlp::{BiasInit, MlpDeviceConfig, RejectedUpdates, Topology};
use crate::slp::SlpConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Slp,
    Mlp,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Slp => "slp",
            Model::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "slp" => Ok(Model::Slp),
            "mlp" => Ok(Model::Mlp),
            other => Err(format!("unknown model '{other}' (expected slp or mlp)")),
        }
    }
}

/// Optional overrides of the device defaults. Unset fields keep the model's default.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverrides {
    /// Window thresholds. The SLP uses one per internal variable; the MLP uses
    /// the first for synapses and the second for nodes.
    pub thresholds: Option<Vec<f64>>,
    pub window_width: Option<f64>,
    /// Full range of each internal variable.
    pub d_prime: Option<f64>,
    /// Weight per unit internal variable.
    pub scale_b: Option<f64>,
    pub tau: Option<f64>,
    pub mu_v: Option<f64>,
    pub r_on: Option<f64>,
    pub r_off: Option<f64>,
    pub bias_init: Option<BiasInit>,
}

/// Internal-variable range of the SLP device.
pub const SLP_DEFAULT_D_PRIME: f64 = 40.0;

/// Offsets separating the dataset and evaluation streams from realization seeds.
const DATASET_SEED_OFFSET: u64 = 1 << 32;
const EVAL_SEED_OFFSET: u64 = 2 << 32;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: Model,
    pub gate: Gate,
    pub epochs: usize,
    pub dataset_size: usize,
    pub n_realizations: usize,
    /// Unset means 0.1, or 0.01 for the MLP on XOR.
    pub learning_rate: Option<f64>,
    /// Realization `r` seeds its generator with `seed + r`.
    pub seed: u64,
    /// Unset derives the dataset seed from `seed`.
    pub dataset_seed: Option<u64>,
    /// Draw a new dataset for every realization instead of sharing one.
    pub resample_dataset: bool,
    pub topology: Vec<usize>,
    pub device: DeviceOverrides,
    /// Whether an MLP step that misses an addressing window stops the run.
    pub on_window_violation: RejectedUpdates,
    pub roc_epochs: usize,
    pub roc_eval_size: usize,
    pub roc_thresholds: Vec<f64>,
    pub out_dir: PathBuf,
    pub svg: bool,
    /// Logarithmic error axis in the SVG plot.
    pub svg_log: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Slp,
            gate: Gate::Or,
            epochs: 1000,
            dataset_size: 100,
            n_realizations: 100,
            learning_rate: None,
            seed: 0,
            dataset_seed: None,
            resample_dataset: false,
            topology: vec![2, 2, 1],
            device: DeviceOverrides::default(),
            on_window_violation: RejectedUpdates::Abort,
            roc_epochs: 500,
            roc_eval_size: 100,
            roc_thresholds: vec![0.3, 0.5, 0.7],
            out_dir: PathBuf::from("."),
            svg: false,
            svg_log: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown configuration key: {0}")]
    UnknownKey(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("value out of range for '{field}': {reason}")]
    OutOfRange { field: String, reason: String },
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("cannot read configuration {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn out_of_range(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn classify(err: serde_json::Error) -> ConfigError {
    use serde_json::error::Category;
    let msg = err.to_string();
    match err.classify() {
        Category::Data if msg.starts_with("unknown field") => ConfigError::UnknownKey(msg),
        Category::Data if msg.starts_with("invalid type") => ConfigError::TypeMismatch(msg),
        Category::Data => out_of_range("value", msg),
        Category::Syntax | Category::Eof | Category::Io => ConfigError::Syntax(msg),
    }
}

impl ExperimentConfig {
    /// Parses JSON text. Blank text yields the defaults.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(classify)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match (self.model, self.gate) {
            (Model::Mlp, Gate::Xor) => 0.01,
            _ => 0.1,
        })
    }

    pub fn dataset_seed(&self) -> u64 {
        self.dataset_seed.unwrap_or(self.seed.wrapping_add(DATASET_SEED_OFFSET))
    }

    pub fn realization_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    pub fn realization_dataset_seed(&self, r: usize) -> u64 {
        if self.resample_dataset {
            self.dataset_seed().wrapping_add(r as u64)
        } else {
            self.dataset_seed()
        }
    }

    /// Seed of the held-out set scored by the ROC experiment.
    pub fn eval_seed(&self) -> u64 {
        self.dataset_seed().wrapping_add(EVAL_SEED_OFFSET)
    }

    pub fn device_params(&self) -> Result<DeviceParams, ConfigError> {
        let base = DeviceParams::default();
        let d = &self.device;
        DeviceParams::new(
            d.r_on.unwrap_or(base.r_on),
            d.r_off.unwrap_or(base.r_off),
            base.d,
            d.mu_v.unwrap_or(base.mu_v),
            base.i_gamma,
        )
        .map_err(|e| out_of_range("device", e.to_string()))
    }

    pub fn slp_config(&self) -> Result<SlpConfig, ConfigError> {
        let base = WindowSpec::default();
        let thresholds = self
            .device
            .thresholds
            .clone()
            .unwrap_or_else(|| base.thresholds().to_vec());
        let window = WindowSpec::new(thresholds, self.device.window_width.unwrap_or(base.width()))
            .map_err(|e| out_of_range("device.thresholds", e.to_string()))?;
        let d_prime = self.device.d_prime.unwrap_or(SLP_DEFAULT_D_PRIME);
        let scale = self.device.scale_b.unwrap_or(1.0);
        if !(d_prime > 0.0 && scale > 0.0) {
            return Err(out_of_range("device", "d_prime and scale_b must be > 0"));
        }
        Ok(SlpConfig {
            window,
            weight_bound: scale * d_prime / 2.0,
        })
    }

    pub fn mlp_config(&self) -> Result<MlpDeviceConfig, ConfigError> {
        let base = MlpDeviceConfig::default();
        let d = &self.device;
        let (synapse_threshold, node_threshold) = match &d.thresholds {
            None => (base.synapse_threshold, base.node_threshold),
            Some(t) if t.len() >= 2 => (t[0], t[1]),
            Some(_) => return Err(out_of_range("device.thresholds", "the MLP needs two thresholds")),
        };
        let cfg = MlpDeviceConfig {
            params: self.device_params()?,
            pulse_tau: d.tau.unwrap_or(base.pulse_tau),
            d_prime: d.d_prime.unwrap_or(base.d_prime),
            scale_b: d.scale_b.unwrap_or(base.scale_b),
            synapse_threshold,
            node_threshold,
            window_width: d.window_width.unwrap_or(base.window_width),
            bias_init: d.bias_init.unwrap_or(base.bias_init),
        };
        cfg.validate().map_err(|e| out_of_range("device", e.to_string()))?;
        Ok(cfg)
    }

    pub fn topology(&self) -> Result<Topology, ConfigError> {
        let t = Topology::new(self.topology.clone()).map_err(|e| out_of_range("topology", e.to_string()))?;
        if t.inputs() != 2 || t.outputs() != 1 {
            return Err(out_of_range("topology", "gate data needs 2 inputs and 1 output"));
        }
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("epochs", self.epochs),
            ("dataset_size", self.dataset_size),
            ("n_realizations", self.n_realizations),
            ("roc_epochs", self.roc_epochs),
            ("roc_eval_size", self.roc_eval_size),
        ] {
            if v == 0 {
                return Err(out_of_range(field, "must be >= 1"));
            }
        }
        let eta = self.learning_rate();
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(out_of_range("learning_rate", format!("must be > 0, got {eta}")));
        }
        if self.roc_thresholds.is_empty() {
            return Err(out_of_range("roc_thresholds", "need at least one threshold"));
        }
        if let Some(t) = self.roc_thresholds.iter().find(|t| !t.is_finite()) {
            return Err(out_of_range("roc_thresholds", format!("{t} is not finite")));
        }
        match self.model {
            Model::Slp => {
                if let Some(t) = self.roc_thresholds.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
                    return Err(out_of_range("roc_thresholds", format!("{t} outside (0, 1)")));
                }
                let cfg = self.slp_config()?;
                if cfg.window.len() != 4 {
                    return Err(out_of_range("device.thresholds", "the SLP needs four thresholds"));
                }
                if let Some(tau) = self.device.tau {
                    if !(tau > 0.0) {
                        return Err(out_of_range("device.tau", "must be > 0"));
                    }
                }
                self.device_params()?;
            }
            Model::Mlp => {
                self.topology()?;
                self.mlp_config()?;
            }
        }
        Ok(())
    }
}
