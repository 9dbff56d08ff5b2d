//! Command-line front end: configuration, sweeps, validation and output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod sweeps;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{Mode, Overrides, RunConfig};
use error::{CliError, CliResult};
use output::{PlotSpec, Table};

pub const WORKERS_ENV: &str = "HOLOSIM_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "holosim", version, about = "Twin-beam interferometer noise sweeps and validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// TOML run configuration; defaults reproduce the published figures.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (CSV for sweeps, JSON for validate).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fock cutoff `n_max` for oracle computations.
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uncertainty ratio against λτ at fixed squeezing.
    SweepEnvCoupling(Common),
    /// Uncertainty ratio against squeezing at fixed λτ.
    SweepEnvSqueezing(Common),
    /// Deformed-commutator uncertainty against squeezing for several ε.
    SweepModccr(Common),
    /// Run every invariant suite and write a JSON report.
    Validate(Common),
    /// Monte-Carlo phase-correlation recovery.
    PhaseMc(Common),
}

impl Command {
    fn parts(&self) -> (Mode, &Common) {
        match self {
            Self::SweepEnvCoupling(c) => (Mode::SweepEnvCoupling, c),
            Self::SweepEnvSqueezing(c) => (Mode::SweepEnvSqueezing, c),
            Self::SweepModccr(c) => (Mode::SweepModccr, c),
            Self::Validate(c) => (Mode::Validate, c),
            Self::PhaseMc(c) => (Mode::PhaseMc, c),
        }
    }
}

pub fn load_config(mode: Mode, common: &Common) -> CliResult<RunConfig> {
    let file = match &common.config {
        Some(path) => {
            let src = fs::read_to_string(path).map_err(|e| CliError::Config {
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            config::parse_file(&src)?
        }
        None => config::FileConfig::default(),
    };
    config::resolve(mode, file, &Overrides { seed: common.seed, cutoff: common.cutoff })
}

/// Worker count: `HOLOSIM_WORKERS`, then the config file, then all cores.
pub fn worker_count(config: &RunConfig) -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config { line: None, message: format!("{WORKERS_ENV}={v:?} is not a positive integer") }),
        },
        Err(_) => Ok(config.workers),
    }
}

/// What a run produced, for the caller to report.
#[derive(Debug)]
pub enum Outcome {
    Table { csv: PathBuf, table: Table },
    Report { json: PathBuf, report: validate::Report },
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Report { report, .. } if !report.passed => 1,
            _ => 0,
        }
    }
}

fn default_out(mode: Mode) -> PathBuf {
    let ext = if mode == Mode::Validate { "json" } else { "csv" };
    PathBuf::from(format!("{}.{ext}", mode.name()))
}

fn plot_spec(config: &RunConfig) -> Option<PlotSpec<'static>> {
    let f = &config.file;
    match config.mode {
        Mode::SweepEnvCoupling => Some(PlotSpec {
            x: "lambda_tau",
            y: &["ratio_full", "ratio_approx"],
            group: "M",
            groups: f.env_coupling.m.clone(),
            logscale_x: true,
            xlabel: "λτ",
        }),
        Mode::SweepEnvSqueezing => Some(PlotSpec {
            x: "r",
            y: &["ratio_full", "ratio_approx"],
            group: "M",
            groups: f.env_squeezing.m.clone(),
            logscale_x: false,
            xlabel: "r",
        }),
        Mode::SweepModccr => Some(PlotSpec {
            x: "r",
            y: &["ratio_analytic", "ratio_fock"],
            group: "epsilon",
            groups: f.modccr.epsilon.clone(),
            logscale_x: false,
            xlabel: "r",
        }),
        _ => None,
    }
}

fn write_report(path: &Path, report: &validate::Report) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

/// Executes one resolved run and writes its artifacts.
pub fn execute(config: &RunConfig, out: Option<&Path>) -> CliResult<Outcome> {
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(config.mode));
    let f = &config.file;
    let table = match config.mode {
        Mode::SweepEnvCoupling => sweeps::run_sweep_env_coupling(&f.env_coupling)?,
        Mode::SweepEnvSqueezing => sweeps::run_sweep_env_squeezing(&f.env_squeezing)?,
        Mode::SweepModccr => sweeps::run_sweep_modccr(&f.modccr, config.cutoff)?,
        Mode::PhaseMc => sweeps::run_phase_mc(&f.phase_mc, config.seed, config.cutoff)?,
        Mode::Validate => {
            let report = validate::run_validate(f.validate.fault, config.cutoff);
            write_report(&out, &report)?;
            return Ok(Outcome::Report { json: out, report });
        }
    };
    output::write_table(&out, config, &table)?;
    if let Some(spec) = plot_spec(config) {
        output::write_gnuplot(&out, &spec)?;
    }
    Ok(Outcome::Table { csv: out, table })
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    let (mode, common) = cli.command.parts();
    let config = load_config(mode, common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(&config)? {
        pool = pool.num_threads(n);
    }
    pool.build()?.install(|| execute(&config, common.out.as_deref()))
}
