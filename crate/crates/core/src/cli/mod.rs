//! Command-line front end: resolve a study spec, run it, write artifacts.

pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::experiments::{run_study, run_validation_suite, Scenario};
use output::{write_study, write_validation, OutputDir};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("study failed: {0}")]
    Study(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Study(_) | CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nelson", version, about = "Relaxation to the Born density along Nelson stochastic trajectories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct StudyArgs {
    /// JSON document with one object per scenario, merged over the defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one spec entry; dotted paths reach nested keys, bare names the parameter grid.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub threads: usize,
    /// Print the resolved spec and exit without running.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-slit relaxation against the onset of the interference peak.
    DoubleSlit(StudyArgs),
    /// Gaussian packets in the harmonic trap: relaxation time against width.
    Oscillator(StudyArgs),
    /// Node crossings of the first excited state against the time step.
    Barrier(StudyArgs),
    /// Relaxation in a nearly pure first excited state.
    Superposition(StudyArgs),
    /// Packet bouncing on a mirror: three-phase relaxation and interference onset.
    Gravity(StudyArgs),
    /// Run the built-in validation suite.
    Validate {
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        #[arg(long, value_name = "N", default_value_t = 0)]
        threads: usize,
    },
    /// Print a config document holding every scenario's defaults.
    Defaults,
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run_scenario(scenario: Scenario, args: &StudyArgs) -> Result<(), CliError> {
    let spec = config::resolve_spec(scenario, args.config.as_deref(), &args.overrides, args.seed)?;
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&spec).expect("spec serializes"));
        return Ok(());
    }
    let out = pool(args.threads)?.install(|| run_study(&spec)).map_err(|e| CliError::Study(e.to_string()))?;
    let dir = OutputDir::new(&args.out)?;
    let files = write_study(&dir, &out)?;
    eprintln!("{scenario}: {} records, {} files in {}", out.report.records.len(), files, args.out.display());
    for r in &out.report.records {
        for e in &r.errors {
            eprintln!("  {:?}: {e}", r.params);
        }
    }
    Ok(())
}

fn run_validate(out: &std::path::Path, threads: usize) -> Result<bool, CliError> {
    let checks = pool(threads)?.install(run_validation_suite);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!("{}  {:<width$}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let dir = OutputDir::new(out)?;
    write_validation(&dir, &checks)?;
    Ok(checks.iter().all(|c| c.passed))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::DoubleSlit(a) => run_scenario(Scenario::DoubleSlit, a),
        Command::Oscillator(a) => run_scenario(Scenario::Oscillator, a),
        Command::Barrier(a) => run_scenario(Scenario::Barrier, a),
        Command::Superposition(a) => run_scenario(Scenario::Superposition, a),
        Command::Gravity(a) => run_scenario(Scenario::Gravity, a),
        Command::Validate { out, threads } => match run_validate(out, *threads) {
            Ok(true) => Ok(()),
            Ok(false) => return 1,
            Err(e) => Err(e),
        },
        Command::Defaults => {
            println!("{}", serde_json::to_string_pretty(&config::default_document()).expect("defaults serialize"));
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
