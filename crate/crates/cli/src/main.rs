//! Command-line front end: lineshape scans, photon budget, resonator offset,
//! trap fits and the built-in self test.

mod commands;
mod config;
mod error;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "ioncav", version, about = "Trapped-ion cavity QED steady-state simulator")]
struct Cli {
    /// JSON run configuration; the bundled paper defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the scan
    #[arg(long, global = true)]
    parallel: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count rate versus cavity detuning, as CSV
    Scan {
        /// Override scan.points
        #[arg(long)]
        points: Option<usize>,
        /// Override drive.intensity_sat
        #[arg(long)]
        intensity: Option<f64>,
    },
    /// Photon budget and detection ladder, as JSON
    Budget,
    /// Fit the voltage efficiency factor to measured secular frequencies
    TrapFit {
        /// CSV with header u0_volts,separation_um,axis,omega_hz; bundled
        /// synthetic data when omitted
        csv: Option<PathBuf>,
    },
    /// Infrared/ultraviolet resonance offset and the implied length
    /// difference, as JSON
    Resonator,
    /// Oracle and invariant checks
    Selftest,
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    if let Command::Selftest = cli.command {
        let (table, ok) = commands::run_selftest();
        if !ok {
            eprint!("{table}");
            return Err(CliError::Check("self test failed".into()));
        }
        return Ok(table);
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Scan { points, intensity } => commands::run_scan(&cfg, *points, *intensity),
        Command::Budget => commands::run_budget(&cfg).map(|v| format::to_json(&v)),
        Command::TrapFit { csv } => commands::run_trap_fit(&cfg, csv.as_deref()).map(|v| format::to_json(&v)),
        Command::Resonator => commands::run_resonator(&cfg).map(|v| format::to_json(&v)),
        Command::Selftest => unreachable!("handled above"),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match cli.parallel {
        Some(0) => return Err(CliError::Config("--parallel must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start {n} worker threads: {e}")))?
            .install(|| execute(cli))?,
        None => execute(cli)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("ERROR({}): {msg}", e.label());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
