//! Perceptrons whose synapses and neurons are all simulated memristors.
//!
//! - [`device`]: memristor models. Ohm's-law output, HP linear ion drift,
//!   threshold-window addressing of several internal variables, and exact
//!   pulse integration.
//! - [`slp`]: a single-layer perceptron stored in one four-variable memristor,
//!   trained with a window-addressed delta rule.
//! - [`mlp`]: a multilayer perceptron of synaptic and node memristors trained
//!   with backpropagation delivered through the same addressing windows.
//! - [`data`]: logic-gate datasets and epoch shuffling.
//! - [`metrics`]: cost, epoch totals, ROC points and AUC.
//! - [`harness`]: configuration and multi-seed experiment runners used by the CLI.
//!
//! All randomness flows through [`SimRng`] (ChaCha8) seeded from `u64`, so every run
//! is reproducible from its configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod data;
pub mod device;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod mlp;
pub mod slp;

pub use data::{gate_label, generate_dataset, shuffle_epoch, Dataset, Gate};
pub use device::{DeviceParams, MemristorState, PulseResult, WindowSpec};
pub use error::{Error, Result};
pub use metrics::{auc, roc_points, sample_cost, total_error, EpochRecord, RocPoint};
pub use mlp::{BiasInit, MlpDeviceConfig, MlpNetwork, RejectedUpdates, Topology};
pub use slp::{Sample, SlpMachine};

/// Pseudo-random generator used for every seeded operation.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
