//! `summoment` command-line runner: process generation, figure experiments
//! and CSV-in / JSON-out wrappers around `summoment-core`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;

pub use error::{CliError, CliResult};

use commands::{AlignArgs, Fit2mpArgs, MomentsArgs, PredictArgs, RegressArgs, SummomentArgs};
use config::{apply_overrides, ConfigFile, ProcessConfig};
use experiments::run_experiment;

pub const DEFAULT_SEED: u64 = 20_240_229;
pub const REPORT_SCHEMA: &str = "summoment.report.v1";

#[derive(Debug, Parser)]
#[command(name = "summoment", version, about = "Sum-moment statistics and figure experiments")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "SUMMOMENT_JOBS")]
    pub jobs: Option<usize>,
    /// Single worker, fixed reduction order.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Output file (`generate`, analysis commands) or directory (`experiment`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file (`"version": "v1"`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a process described by the config's `process` object.
    Generate {
        /// `key=value` overrides of the process object.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Reproduce a figure table: fig2, fig4, fig5 or fig3.
    Experiment {
        name: String,
        #[arg(long)]
        trials: Option<usize>,
        /// `key=value` parameter overrides.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Sample moments, lag covariances and distances of CSV columns.
    Moments(MomentsArgs),
    /// Sum-moments over trials (rows) of a vector ensemble.
    Summoment(SummomentArgs),
    /// Least squares or split-data line fit.
    Regress(RegressArgs),
    /// Fit a 2nd order Markov kernel to a covariance sequence.
    Fit2mp(Fit2mpArgs),
    /// One-step linear prediction under a covariance kernel.
    Predict(PredictArgs),
    /// Estimate the delay between two columns.
    Align(AlignArgs),
}

/// Seed and worker settings shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Runtime {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub deterministic: bool,
}

impl Runtime {
    pub fn threads(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.jobs.unwrap_or(0)
        }
    }

    /// Worker count actually used.
    pub fn resolved_threads(&self) -> usize {
        match self.threads() {
            0 => std::thread::available_parallelism().map_or(1, usize::from),
            n => n,
        }
    }

    pub fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads())
            .build()
            .map_err(|e| CliError::validation("jobs", e.to_string()))
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) if p != Path::new("-") => write_text(p, text),
        _ => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("-", e)),
    }
}

fn json_text(v: &Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Report written next to an experiment's CSV.
pub fn experiment_report(out: &experiments::ExperimentOutput, rt: &Runtime, seconds: f64) -> Value {
    let rows: Vec<Vec<f64>> =
        (0..out.table.n_rows()).map(|i| out.table.columns.iter().map(|c| c[i]).collect()).collect();
    json!({
        "schema": REPORT_SCHEMA,
        "experiment_id": out.id,
        "seed": rt.seed,
        "config": out.params,
        "columns": out.table.headers,
        "rows": rows,
        "meta": {
            "tool_version": env!("CARGO_PKG_VERSION"),
            "wall_clock_seconds": seconds,
            "trials": out.trials,
            "threads": rt.resolved_threads(),
            "deterministic": rt.deterministic,
        },
    })
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile { version: config::CONFIG_VERSION.into(), ..Default::default() },
    };
    let rt = Runtime {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        jobs: cli.jobs.or(file.jobs),
        deterministic: cli.deterministic || file.deterministic.unwrap_or(false),
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate { set } => {
            let mut v = file.process.clone().unwrap_or(Value::Null);
            apply_overrides(&mut v, set)?;
            if v.is_null() {
                return Err(CliError::validation("process", "no process given (config `process` or --set kind=...)"));
            }
            let table = ProcessConfig::from_value(v)?.generate(rt.seed)?;
            emit(out, &table.to_csv_string())
        }
        Command::Experiment { name, trials, set } => {
            let mut v = file.experiments.get(name).cloned().unwrap_or(Value::Null);
            if let Some(t) = trials {
                apply_overrides(&mut v, &[format!("trials={t}")])?;
            }
            apply_overrides(&mut v, set)?;
            let start = Instant::now();
            let res = run_experiment(name, v, &rt)?;
            let report = experiment_report(&res, &rt, start.elapsed().as_secs_f64());
            match out {
                Some(dir) if dir != Path::new("-") => {
                    write_text(&dir.join(format!("{}.csv", res.id)), &res.table.to_csv_string())?;
                    write_text(&dir.join(format!("{}.report.json", res.id)), &json_text(&report)?)
                }
                _ => emit(None, &res.table.to_csv_string()),
            }
        }
        Command::Moments(a) => emit(out, &json_text(&commands::moments(a)?)?),
        Command::Summoment(a) => emit(out, &json_text(&commands::summoment(a)?)?),
        Command::Regress(a) => emit(out, &json_text(&commands::regress(a)?)?),
        Command::Fit2mp(a) => emit(out, &json_text(&commands::fit2mp(a)?)?),
        Command::Predict(a) => emit(out, &json_text(&commands::predict(a)?)?),
        Command::Align(a) => emit(out, &json_text(&commands::align(a)?)?),
    }
}
