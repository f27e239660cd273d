use std::path::PathBuf;
use std::process::ExitCode;

use cgm_vi::checks::{self, Options};
use cgm_vi::commands;
use clap::{Parser, Subcommand, ValueEnum};

/// Constrained gradient method experiment runner.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run config (and its sweep): trace CSVs plus summary JSON.
    Run { config: PathBuf },
    /// Run the validation suite and print pass/fail per check.
    Validate {
        /// Only checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Swap in a deliberately broken component to confirm the suite catches it.
        #[arg(long, hide = true)]
        mutant: Option<Mutant>,
    },
    /// Run a horizon sweep and fit log-log convergence slopes.
    SweepRates { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    /// Closed-form direction without the max{0, ·} clamp.
    Unclamped,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => commands::cmd_run(config),
        Command::Validate { filter, report, mutant } => {
            let opts = match mutant {
                Some(Mutant::Unclamped) => Options {
                    closed_form: checks::unclamped_closed_form,
                },
                None => Options::default(),
            };
            commands::cmd_validate(filter.as_deref(), report.as_deref(), &opts)
        }
        Command::SweepRates { config } => commands::cmd_sweep_rates(config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
