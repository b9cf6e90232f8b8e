//! `scc`: runs the spectral-basis experiments and the validation suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver or estimation
//! failure, 3 configuration or I/O error.

use clap::{Args, Parser, Subcommand};
use scc_core::experiment::{self, ExperimentConfig, ExperimentOutput};
use scc_core::SccError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "scc",
    version,
    about = "Spectral-basis SU(1,1) interferometry sweeps"
)]
struct Cli {
    /// Worker threads for sweep points (defaults to one per core).
    #[arg(long, env = "SCC_WORKERS", global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rapidities and energies of every paired eigenstate.
    Spectrum(Common),
    /// Seeded pair number eta1 against the seeding time t, for each q in `q_list`.
    SeedSweep(Common),
    /// Output pair number against the dwell time u; fits the fringe frequency.
    DwellSweep(Common),
    /// Phase sensitivity curves against the interferometer phase.
    PhaseSweep(Common),
    /// Minimum sensitivity against eta1 for the free and quasifree sequences.
    Eta1Sweep(Common),
    /// Runs the numerical property suite and reports each property.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Overrides one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn exit_code(err: &SccError) -> u8 {
    match err {
        SccError::Config(_) | SccError::InvalidParams { .. } | SccError::Io(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, SccError> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| SccError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let overrides = common
        .set
        .iter()
        .map(|s| experiment::parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    ExperimentConfig::load(&text, &overrides)
}

fn report_outputs(out: &ExperimentOutput, cfg: &ExperimentConfig) -> Result<(), SccError> {
    for path in experiment::write_outputs(out, cfg)? {
        println!("wrote {}", path.display());
    }
    println!("{}", out.summary);
    Ok(())
}

fn run(command: Command) -> Result<u8, SccError> {
    let (common, runner): (Common, fn(&ExperimentConfig) -> _) = match command {
        Command::Validate(common) => {
            let cfg = load_config(&common)?;
            let report = experiment::validate(&cfg)?;
            for p in &report.properties {
                println!("{}", p.line());
            }
            let path = report.to_table(&cfg).write(&cfg.output, cfg.format)?;
            println!("wrote {}", path.display());
            let status = if report.passed() { "pass" } else { "fail" };
            println!("summary: validation={status}");
            return Ok(if report.passed() { 0 } else { EXIT_VALIDATION });
        }
        Command::Spectrum(c) => (c, experiment::spectrum),
        Command::SeedSweep(c) => (c, experiment::seed_sweep),
        Command::DwellSweep(c) => (c, experiment::dwell_sweep),
        Command::PhaseSweep(c) => (c, experiment::phase_sweep),
        Command::Eta1Sweep(c) => (c, experiment::eta1_sweep),
    };
    let cfg = load_config(&common)?;
    let out = runner(&cfg)?;
    report_outputs(&out, &cfg)?;
    Ok(0)
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; help and version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: config: SCC_WORKERS must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: config: worker pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
