use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memristor_perceptron::harness::{
    run_learning_experiment, run_roc_experiment, ConfigError, ExperimentConfig, HarnessError, Model,
};
use memristor_perceptron::mlp::{BiasInit, RejectedUpdates};
use memristor_perceptron::{generate_dataset, Dataset, Gate};

#[derive(Parser)]
#[command(name = "memristor-perceptron", version, about = "Memristor perceptron experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learning-curve experiment: mean and std of the epoch error over realizations.
    Train(Overrides),
    /// ROC points and AUC on a held-out set.
    Roc(Overrides),
    /// Write a gate dataset as CSV, or check one with --import.
    Dataset {
        #[command(flatten)]
        overrides: Overrides,
        /// Validate this CSV against the gate instead of writing one.
        #[arg(long, value_name = "FILE")]
        import: Option<PathBuf>,
    },
    /// Resolve and check a configuration, printing it as JSON.
    ValidateConfig(Overrides),
}

/// Flags override the configuration file, which overrides the defaults.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<Model>,
    #[arg(long)]
    gate: Option<Gate>,
    /// Training epochs; for `roc` this sets the ROC training length.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dataset_size: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dataset_seed: Option<u64>,
    #[arg(long)]
    resample_dataset: bool,
    #[arg(long, value_delimiter = ',')]
    topology: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    window_width: Option<f64>,
    #[arg(long)]
    d_prime: Option<f64>,
    #[arg(long)]
    scale_b: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    mu_v: Option<f64>,
    #[arg(long)]
    r_on: Option<f64>,
    #[arg(long)]
    r_off: Option<f64>,
    #[arg(long, value_parser = parse_bias_init)]
    bias_init: Option<BiasInit>,
    /// abort (default) or skip MLP steps whose updates miss a window.
    #[arg(long, value_parser = parse_rejected)]
    on_window_violation: Option<RejectedUpdates>,
    #[arg(long)]
    roc_eval_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    roc_thresholds: Option<Vec<f64>>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    /// Logarithmic error axis in the SVG plot.
    #[arg(long)]
    svg_log: bool,
}

fn parse_bias_init(s: &str) -> Result<BiasInit, String> {
    match s.to_ascii_lowercase().as_str() {
        "zero" => Ok(BiasInit::Zero),
        "glorot" => Ok(BiasInit::Glorot),
        other => Err(format!("unknown bias init '{other}' (expected zero or glorot)")),
    }
}

fn parse_rejected(s: &str) -> Result<RejectedUpdates, String> {
    match s.to_ascii_lowercase().as_str() {
        "abort" => Ok(RejectedUpdates::Abort),
        "skip" => Ok(RejectedUpdates::Skip),
        other => Err(format!("unknown policy '{other}' (expected abort or skip)")),
    }
}

impl Overrides {
    fn resolve(self, epochs_are_roc: bool) -> Result<ExperimentConfig, ConfigError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.model {
            c.model = v;
        }
        if let Some(v) = self.gate {
            c.gate = v;
        }
        if let Some(v) = self.epochs {
            if epochs_are_roc {
                c.roc_epochs = v;
            } else {
                c.epochs = v;
            }
        }
        if let Some(v) = self.dataset_size {
            c.dataset_size = v;
        }
        if let Some(v) = self.realizations {
            c.n_realizations = v;
        }
        if self.learning_rate.is_some() {
            c.learning_rate = self.learning_rate;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.dataset_seed.is_some() {
            c.dataset_seed = self.dataset_seed;
        }
        c.resample_dataset |= self.resample_dataset;
        if let Some(v) = self.topology {
            c.topology = v;
        }
        let d = &mut c.device;
        if self.thresholds.is_some() {
            d.thresholds = self.thresholds;
        }
        for (slot, v) in [
            (&mut d.window_width, self.window_width),
            (&mut d.d_prime, self.d_prime),
            (&mut d.scale_b, self.scale_b),
            (&mut d.tau, self.tau),
            (&mut d.mu_v, self.mu_v),
            (&mut d.r_on, self.r_on),
            (&mut d.r_off, self.r_off),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if self.bias_init.is_some() {
            d.bias_init = self.bias_init;
        }
        if let Some(v) = self.on_window_violation {
            c.on_window_violation = v;
        }
        if let Some(v) = self.roc_eval_size {
            c.roc_eval_size = v;
        }
        if let Some(v) = self.roc_thresholds {
            c.roc_thresholds = v;
        }
        if let Some(v) = self.out {
            c.out_dir = v;
        }
        c.svg |= self.svg;
        c.svg_log |= self.svg_log;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("{0}")]
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Harness(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Harness(e) => e.exit_code() as u8,
            CliError::Dataset(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train(o) => {
            let config = o.resolve(false)?;
            let report = run_learning_experiment(&config)?;
            let last = report.records.last().expect("at least one epoch");
            println!(
                "{}: epoch 1 mean {:.6}, epoch {} mean {:.6}",
                report.csv_path.display(),
                report.records[0].mean_e_total,
                last.epoch,
                last.mean_e_total
            );
            let rejected: usize = report.rejected_steps.iter().sum();
            if rejected > 0 {
                println!("skipped {rejected} steps whose updates missed a window");
            }
            if let Some(svg) = report.svg_path {
                println!("{}", svg.display());
            }
        }
        Command::Roc(o) => {
            let config = o.resolve(true)?;
            let report = run_roc_experiment(&config)?;
            println!("{}: mean auc {:.6}", report.csv_path.display(), report.mean_auc);
            let rejected: usize = report.realizations.iter().map(|r| r.rejected_steps).sum();
            if rejected > 0 {
                println!("skipped {rejected} steps whose updates missed a window");
            }
            for p in &report.mean_points {
                println!("  threshold {}: tpr {:.4} fpr {:.4}", p.threshold, p.tpr, p.fpr);
            }
        }
        Command::Dataset { overrides, import } => {
            let config = overrides.resolve(false)?;
            match import {
                Some(path) => {
                    let file = File::open(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    let data = Dataset::read_csv(BufReader::new(file), config.gate)
                        .map_err(|e| CliError::Dataset(format!("{}: {e}", path.display())))?;
                    println!("{}: {} valid {} samples", path.display(), data.len(), config.gate);
                }
                None => {
                    let data = generate_dataset(config.gate, config.dataset_size, config.dataset_seed())
                        .map_err(|e| CliError::Harness(HarnessError::Metrics(e)))?;
                    std::fs::create_dir_all(&config.out_dir)
                        .map_err(|e| CliError::Io(format!("{}: {e}", config.out_dir.display())))?;
                    let path = config
                        .out_dir
                        .join(format!("dataset_{}.csv", config.gate.name().to_ascii_lowercase()));
                    let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    data.write_csv(file).map_err(|e| CliError::Io(e.to_string()))?;
                    println!("{}", path.display());
                }
            }
        }
        Command::ValidateConfig(o) => {
            let config = o.resolve(false)?;
            println!("{}", config.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(
                &e,
                CliError::Harness(HarnessError::Model {
                    source: memristor_perceptron::Error::WindowViolation { .. },
                    ..
                })
            ) {
                eprintln!("hint: --on-window-violation skip leaves such steps unwritten and continues");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
