//! The `thermocast` command line.
//!
//! Settings resolve per field as: command-line flag, then `--config` file,
//! then the built-in default.

mod commands;
mod config;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use commands::{cmd_evaluate, cmd_export_plot, cmd_forecast, cmd_ingest, cmd_train, EvaluationSummary};
pub use config::{parse_config_file, ConfigError, RunConfig, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Parse an export and report its contents.
    Ingest,
    /// Train a model and save it.
    Train,
    /// Score rolling forecasts over the test split.
    Evaluate,
    /// Forecast past the end of the input series.
    Forecast,
    /// Draw a forecast report CSV as SVG.
    ExportPlot,
}

#[derive(Debug, Parser)]
#[command(name = "thermocast", version, about = "Hourly temperature forecasting with a ReLU Elman RNN")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV: a meteoblue export, or a forecast report for export-plot.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long = "keep-prob")]
    pub keep_prob: Option<f64>,
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluate only the first test window.
    #[arg(long)]
    pub single_window: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn flag_settings(&self) -> Settings {
        Settings {
            input_path: self.input.clone(),
            model_path: self.model.clone(),
            hidden_size: self.hidden,
            learning_rate: self.lr,
            dropout_keep_prob: self.keep_prob,
            dropout_site: None,
            epochs: self.epochs,
            split_ratio: self.split,
            horizon: self.horizon,
            seed: self.seed,
            context_hours: None,
            single_window: self.single_window.then_some(true),
            out_path: self.out.clone(),
        }
    }

    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => Settings::default(),
        };
        Ok(RunConfig::resolve(&self.flag_settings(), &file)?)
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let config = cli.resolve()?;
    match cli.command {
        Command::Ingest => cmd_ingest(&config, out),
        Command::Train => cmd_train(&config, out).map(|_| ()),
        Command::Evaluate => cmd_evaluate(&config, out).map(|_| ()),
        Command::Forecast => cmd_forecast(&config, out).map(|_| ()),
        Command::ExportPlot => cmd_export_plot(&config, out),
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            1
        }
    }
}
