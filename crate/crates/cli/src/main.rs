//! `sbs`: command-line front end for the transducer model.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Artifact, CliError, Format};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "sbs", version, about = "Brillouin acousto-optic transducer calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (dotted keys, e.g. `losses.q_opt = 1e5`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; sweep and dynamics default to csv, the rest to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// List material constants.
    Materials,
    /// Acoustic frequency, overlap and vacuum coupling rate.
    Coupling,
    /// Anti-Stokes scattering matrix at one operating point.
    Smatrix,
    /// Efficiency versus normalized pump strength.
    Sweep,
    /// Time-domain Langevin trace.
    Dynamics,
    /// Stokes-channel threshold, gain and sideband resolution.
    Stokes,
    /// Feasibility report.
    Design,
}

fn run(cli: &Cli) -> Result<Artifact, CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let default_format = match cli.command {
        Command::Sweep | Command::Dynamics => Format::Csv,
        _ => Format::Json,
    };
    let format = cli.format.unwrap_or(default_format);
    match cli.command {
        Command::Materials => commands::materials(&cfg, format),
        Command::Coupling => commands::coupling(&cfg, format),
        Command::Smatrix => commands::smatrix_cmd(&cfg, format),
        Command::Sweep => commands::sweep_cmd(&cfg, format),
        Command::Dynamics => commands::dynamics_cmd(&cfg, format),
        Command::Stokes => commands::stokes_cmd(&cfg, format),
        Command::Design => commands::design_cmd(&cfg, format),
    }
}

fn emit(cli: &Cli, artifact: &Artifact) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &artifact.bytes)?;
            if !cli.quiet {
                let mut stdout = std::io::stdout().lock();
                if let Some(table) = &artifact.table {
                    stdout.write_all(table.as_bytes())?;
                }
                writeln!(stdout, "wrote {}", path.display())?;
            }
        }
        None => std::io::stdout().lock().write_all(&artifact.bytes)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|a| emit(&cli, &a).map_err(CliError::Io));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
