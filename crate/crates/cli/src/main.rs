//! `squeezecool`: noise spectra, cooling rates, steady states and optimized
//! cooling for the four squeezing schemes.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use squeezecool::Error;

use crate::config::{Format, RunConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io(_) | CliError::Csv(_) => 5,
        }
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. } => 2,
        Error::InfeasibleSuppression { .. } => 3,
        Error::Unstable { .. } | Error::HeatingDivergence { .. } | Error::EmptyFeasibleSet => 4,
        Error::Singularity { .. }
        | Error::NearThreshold { .. }
        | Error::Degenerate(_)
        | Error::Numerical(_)
        | Error::NoConvergence { .. } => 5,
    }
}

#[derive(Parser)]
#[command(name = "squeezecool", version, about)]
struct Cli {
    /// TOML run configuration, or a JSON result written by this tool.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: `[output] path`, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Force noise spectrum on the `[grid]` frequencies (CSV).
    Spectrum,
    /// Cooling and heating rates per scheme.
    Rates,
    /// Injected squeezing that cancels the Stokes rate.
    Suppress,
    /// Exact Gaussian steady state.
    Steady,
    /// Scheme-wise optimization (`objective` = min_phonons | max_rate).
    Optimize,
    /// Rate and phonon optima over `[sweep]` values of kappa/4 omega_m (CSV).
    Sweep,
    /// Classical steady state of `[full_model]` and the pump-elimination check.
    ValidateAdiabatic,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Rates => "rates",
            Command::Suppress => "suppress",
            Command::Steady => "steady",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::ValidateAdiabatic => "validate-adiabatic",
        }
    }

    fn tabular(self) -> bool {
        matches!(self, Command::Spectrum | Command::Sweep)
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    version: &'a str,
    config_hash: String,
    seed: u64,
}

#[derive(Serialize)]
struct Document<'a, T> {
    command: &'a str,
    provenance: Provenance<'a>,
    config: RunConfig,
    result: T,
}

fn json_document<T: Serialize>(command: Command, config: &RunConfig, result: T) -> Result<Vec<u8>, CliError> {
    let doc = Document {
        command: command.name(),
        provenance: Provenance {
            version: VERSION,
            config_hash: config.hash(),
            seed: config.seed,
        },
        config: config.canonical(),
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.into()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_document<T: Serialize>(header: Option<&[&str]>, rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# units=omega_m version={VERSION}\n").into_bytes();
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_writer(&mut out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

fn tabular<T: Serialize>(
    command: Command,
    config: &RunConfig,
    format: Format,
    header: Option<&[&str]>,
    rows: &[T],
) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => csv_document(header, rows),
        Format::Json => json_document(command, config, rows),
    }
}

/// Runs the command and returns the bytes to write, plus a failure to report
/// after writing (sweeps keep going past failed points).
fn execute(command: Command, config: &RunConfig, format: Format) -> Result<(Vec<u8>, Option<CliError>), CliError> {
    if !command.tabular() && format == Format::Csv {
        return Err(CliError::Config(format!("`{}` only writes JSON", command.name())));
    }
    let bytes = match command {
        Command::Spectrum => {
            let rows = commands::cmd_spectrum(config)?;
            let value = if config.normalized { "s_ff_normalized" } else { "s_ff" };
            let header = ["omega_over_omega_m", "scheme", value, "error"];
            tabular(command, config, format, Some(&header), &rows)?
        }
        Command::Sweep => {
            let (rows, errors) = commands::cmd_sweep(config)?;
            let bytes = tabular(command, config, format, None, &rows)?;
            let failure = if errors.len() == rows.len() {
                Some(CliError::Core(errors[0].clone()))
            } else {
                errors
                    .into_iter()
                    .find(|e| matches!(e, Error::InfeasibleSuppression { .. }))
                    .map(CliError::Core)
            };
            return Ok((bytes, failure));
        }
        Command::Rates => json_document(command, config, commands::cmd_rates(config)?)?,
        Command::Suppress => json_document(command, config, commands::cmd_suppress(config)?)?,
        Command::Steady => json_document(command, config, commands::cmd_steady(config)?)?,
        Command::Optimize => json_document(command, config, commands::cmd_optimize(config)?)?,
        Command::ValidateAdiabatic => json_document(command, config, commands::cmd_validate_adiabatic(config)?)?,
    };
    Ok((bytes, None))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = config::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let output = config.output.clone().unwrap_or(config::OutputConfig {
        path: None,
        format: None,
    });
    let format = cli.format.or(output.format).unwrap_or(if cli.command.tabular() {
        Format::Csv
    } else {
        Format::Json
    });
    let destination = cli.out.clone().or(output.path);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let (bytes, failure) = pool.install(|| execute(cli.command, &config, format))?;

    match &destination {
        Some(p) => std::fs::write(p, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    if !cli.quiet {
        if let Some(p) = &destination {
            eprintln!("{}: wrote {}", cli.command.name(), p.display());
        }
    }
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squeezecool {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
