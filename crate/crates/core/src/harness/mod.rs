//! Experiment configuration and runners behind the command-line tool.

pub mod config;
pub mod experiment;
pub mod svg;

pub use config::{ConfigError, DeviceOverrides, ExperimentConfig, Model};
pub use experiment::{
    curve_csv, learning_histories, mean_roc, roc_csv, roc_realizations, run_learning_experiment, run_realizations,
    run_roc_experiment, train_realization, HarnessError, LearningReport, RealizationRun, RocRealization, RocReport,
    TrainedModel,
};
pub use svg::learning_curve_svg;
