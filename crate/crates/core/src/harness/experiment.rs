//! Multi-realization learning-curve and ROC experiments.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ConfigError, ExperimentConfig, Model};
use super::svg::learning_curve_svg;
use crate::data::generate_dataset;
use crate::metrics::{aggregate_histories, auc, roc_points, EpochRecord, RocPoint};
use crate::mlp::MlpNetwork;
use crate::seeded_rng;
use crate::slp::{Sample, SlpMachine};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("realization {realization}: {source}")]
    Model {
        realization: usize,
        #[source]
        source: crate::Error,
    },
    #[error(transparent)]
    Metrics(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// A trained perceptron of either kind.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Slp(SlpMachine),
    Mlp(MlpNetwork),
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> crate::Result<f64> {
        match self {
            TrainedModel::Slp(m) => m.output(x),
            TrainedModel::Mlp(m) => m.predict(x),
        }
    }
}

/// Result of training one realization.
#[derive(Debug, Clone)]
pub struct RealizationRun {
    pub model: TrainedModel,
    pub history: Vec<f64>,
    /// MLP steps skipped because their increments missed a window.
    pub rejected_steps: usize,
}

/// Initializes and trains realization `r` for `epochs` epochs. The realization
/// generator draws the initial weights and then every epoch's shuffle.
pub fn train_realization(config: &ExperimentConfig, r: usize, epochs: usize) -> Result<RealizationRun, HarnessError> {
    let data = generate_dataset(config.gate, config.dataset_size, config.realization_dataset_seed(r))
        .map_err(|source| HarnessError::Model { realization: r, source })?;
    let mut rng = seeded_rng(config.realization_seed(r));
    let eta = config.learning_rate();
    let wrap = |source| HarnessError::Model { realization: r, source };
    match config.model {
        Model::Slp => {
            let mut m = SlpMachine::glorot(2, eta, &config.slp_config()?, &mut rng).map_err(wrap)?;
            let history = m.train(&data.samples, epochs, &mut rng).map_err(wrap)?;
            Ok(RealizationRun {
                model: TrainedModel::Slp(m),
                history,
                rejected_steps: 0,
            })
        }
        Model::Mlp => {
            let mut m = MlpNetwork::glorot(config.topology()?, eta, &config.mlp_config()?, &mut rng).map_err(wrap)?;
            let out = m
                .train_with(&data.samples, epochs, &mut rng, config.on_window_violation)
                .map_err(wrap)?;
            Ok(RealizationRun {
                model: TrainedModel::Mlp(m),
                history: out.history,
                rejected_steps: out.rejected_steps,
            })
        }
    }
}

/// Every realization trained for `epochs` epochs, in realization order.
pub fn run_realizations(config: &ExperimentConfig, epochs: usize) -> Result<Vec<RealizationRun>, HarnessError> {
    config.validate()?;
    (0..config.n_realizations)
        .into_par_iter()
        .map(|r| train_realization(config, r, epochs))
        .collect()
}

/// Per-realization epoch totals, in realization order.
pub fn learning_histories(config: &ExperimentConfig) -> Result<Vec<Vec<f64>>, HarnessError> {
    Ok(run_realizations(config, config.epochs)?
        .into_iter()
        .map(|run| run.history)
        .collect())
}

pub fn curve_csv(records: &[EpochRecord]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in records {
        w.serialize(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone)]
pub struct LearningReport {
    pub histories: Vec<Vec<f64>>,
    /// Rejected MLP steps per realization.
    pub rejected_steps: Vec<usize>,
    pub records: Vec<EpochRecord>,
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn prepare_out_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn stem(prefix: &str, config: &ExperimentConfig) -> String {
    format!("{prefix}_{}_{}", config.model, config.gate.name().to_ascii_lowercase())
}

/// Trains every realization and writes `curve_<model>_<gate>.csv` (and an SVG
/// plot when enabled) into the output directory.
pub fn run_learning_experiment(config: &ExperimentConfig) -> Result<LearningReport, HarnessError> {
    let (histories, rejected_steps): (Vec<_>, Vec<_>) = run_realizations(config, config.epochs)?
        .into_iter()
        .map(|run| (run.history, run.rejected_steps))
        .unzip();
    let records = aggregate_histories(&histories)?;
    prepare_out_dir(&config.out_dir)?;
    let name = stem("curve", config);
    let csv_path = config.out_dir.join(format!("{name}.csv"));
    write_file(&csv_path, &curve_csv(&records)?)?;
    let svg_path = if config.svg {
        let path = config.out_dir.join(format!("{name}.svg"));
        let title = format!("{} {} (eta = {})", config.model, config.gate, config.learning_rate());
        write_file(&path, &learning_curve_svg(&records, &title, config.svg_log))?;
        Some(path)
    } else {
        None
    };
    Ok(LearningReport {
        histories,
        rejected_steps,
        records,
        csv_path,
        svg_path,
    })
}

/// ROC points and AUC of one trained realization on the evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct RocRealization {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub rejected_steps: usize,
}

impl RocRealization {
    /// Every threshold separates the classes perfectly.
    pub fn is_perfect(&self) -> bool {
        self.points.iter().all(|p| p.fpr == 0.0 && p.tpr == 1.0)
    }
}

fn evaluation_set(config: &ExperimentConfig) -> Result<Vec<Sample>, HarnessError> {
    Ok(generate_dataset(config.gate, config.roc_eval_size, config.eval_seed())?.samples)
}

/// Trains each realization for `roc_epochs` epochs and scores a held-out set
/// shared by all realizations.
pub fn roc_realizations(config: &ExperimentConfig) -> Result<Vec<RocRealization>, HarnessError> {
    config.validate()?;
    let eval = evaluation_set(config)?;
    let labels: Vec<bool> = eval.iter().map(|s| s.t == 1.0).collect();
    (0..config.n_realizations)
        .into_par_iter()
        .map(|r| {
            let run = train_realization(config, r, config.roc_epochs)?;
            let scores = eval
                .iter()
                .map(|s| run.model.predict(&s.x))
                .collect::<crate::Result<Vec<f64>>>()
                .map_err(|source| HarnessError::Model { realization: r, source })?;
            Ok(RocRealization {
                points: roc_points(&scores, &labels, &config.roc_thresholds)?,
                auc: auc(&scores, &labels)?,
                rejected_steps: run.rejected_steps,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RocReport {
    pub realizations: Vec<RocRealization>,
    /// Rates averaged over realizations, one point per threshold.
    pub mean_points: Vec<RocPoint>,
    pub mean_auc: f64,
    pub csv_path: PathBuf,
}

pub fn mean_roc(realizations: &[RocRealization], thresholds: &[f64]) -> (Vec<RocPoint>, f64) {
    let n = realizations.len() as f64;
    let points = thresholds
        .iter()
        .enumerate()
        .map(|(i, &threshold)| RocPoint {
            threshold,
            tpr: realizations.iter().map(|r| r.points[i].tpr).sum::<f64>() / n,
            fpr: realizations.iter().map(|r| r.points[i].fpr).sum::<f64>() / n,
        })
        .collect();
    (points, realizations.iter().map(|r| r.auc).sum::<f64>() / n)
}

/// `threshold,tpr,fpr` rows followed by a `# auc=` comment line.
pub fn roc_csv(points: &[RocPoint], mean_auc: f64) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    let mut text = String::from_utf8(bytes).expect("csv output is utf-8");
    text.push_str(&format!("# auc={mean_auc}\n"));
    Ok(text)
}

/// Writes `roc_<model>_<gate>.csv` into the output directory.
pub fn run_roc_experiment(config: &ExperimentConfig) -> Result<RocReport, HarnessError> {
    let realizations = roc_realizations(config)?;
    let (mean_points, mean_auc) = mean_roc(&realizations, &config.roc_thresholds);
    prepare_out_dir(&config.out_dir)?;
    let csv_path = config.out_dir.join(format!("{}.csv", stem("roc", config)));
    write_file(&csv_path, &roc_csv(&mean_points, mean_auc)?)?;
    Ok(RocReport {
        realizations,
        mean_points,
        mean_auc,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Gate;

    fn small(model: Model, gate: Gate) -> ExperimentConfig {
        ExperimentConfig {
            model,
            gate,
            epochs: 5,
            dataset_size: 20,
            n_realizations: 3,
            roc_epochs: 5,
            roc_eval_size: 40,
            ..Default::default()
        }
    }

    #[test]
    fn one_realization_one_epoch_gives_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            epochs: 1,
            n_realizations: 1,
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let report = run_learning_experiment(&cfg).unwrap();
        let text = fs::read_to_string(&report.csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,mean_e_total,std_e_total");
        assert_eq!(lines.len(), 2);
        assert!(report.csv_path.ends_with("curve_slp_or.csv"));
        assert!(report.svg_path.is_none());
    }

    #[test]
    fn realizations_differ_but_share_data() {
        let cfg = small(Model::Mlp, Gate::Xor);
        let h = learning_histories(&cfg).unwrap();
        assert_eq!(h.len(), 3);
        assert_ne!(h[0], h[1]);
        assert_eq!(train_realization(&cfg, 1, 5).unwrap().history, h[1]);
    }

    #[test]
    fn roc_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out_dir: dir.path().to_path_buf(),
            ..small(Model::Slp, Gate::And)
        };
        let report = run_roc_experiment(&cfg).unwrap();
        let text = fs::read_to_string(&report.csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "threshold,tpr,fpr");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("# auc="));
        assert!(lines[1].starts_with("0.3,"));
        assert_eq!(report.realizations.len(), 3);
    }

    #[test]
    fn invalid_config_maps_to_exit_code_one() {
        let cfg = ExperimentConfig {
            epochs: 0,
            ..Default::default()
        };
        let err = learning_histories(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
