//! `mfg` — batch front end for the one-dimensional local mean field games
//! solver. Commands: `solve`, `sweep-T`, `diagnose`, `check-model`.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Solves one-dimensional local mean field games (terminal-cost and planning
/// problems on the torus) through a quasilinear elliptic reformulation, and
/// measures the structural properties of the computed solutions.
#[derive(Parser)]
#[command(name = "mfg", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem; write u.csv, m.csv, verify.json, and
    /// manifest.json into the output directory.
    Solve {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        /// Override the [diagnostics] seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve the configured data over every horizon in [sweep] t_values;
    /// write one subdirectory per horizon plus turnpike.json and
    /// horizon_compare.json.
    #[command(name = "sweep-T", visible_alias = "sweep-t")]
    SweepT {
        /// Run configuration file (must carry a [sweep] section).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        /// Override the [diagnostics] seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Solve up to this many sweep members concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run diagnostics on a stored solution directory: checksum the
    /// fields against manifest.json, recompute every measurement, and write
    /// diagnostics.json. Exits 0 only if all requested verdicts pass.
    Diagnose {
        /// Solution directory written by a previous solve.
        #[arg(long)]
        out: PathBuf,
        /// Override the seed echoed in the stored manifest.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample the structural inequalities for the configured model and
    /// report the worst margins (no solve).
    CheckModel {
        /// Run configuration file ([model] section suffices).
        #[arg(long)]
        config: PathBuf,
        /// Optional directory for assumptions.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(commands::EXIT_INPUT as u8);
        }
    };
    let code = match cli.command {
        Command::Solve { config, out, seed } => commands::cmd_solve(&config, &out, seed),
        Command::SweepT {
            config,
            out,
            seed,
            jobs,
        } => commands::cmd_sweep_t(&config, &out, seed, jobs),
        Command::Diagnose { out, seed } => commands::cmd_diagnose(&out, seed),
        Command::CheckModel { config, out } => commands::cmd_check_model(&config, out.as_deref()),
    };
    ExitCode::from(code as u8)
}
