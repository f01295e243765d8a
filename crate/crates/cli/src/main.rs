use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use misreport_cli::commands::{self, CHECK_GRID};

#[derive(Parser)]
#[command(name = "misreport", version, about = "Elicit beliefs, detect misreports, check scoring rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one elicitation + A/B session for the configured agent.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample agents and check that the A/B choice reveals each misreport.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Report grid for the brute-force oracle.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Check properness of a rule on a grid of beliefs.
    CheckRule {
        kind: String,
        #[arg(long, default_value_t = CHECK_GRID)]
        grid: usize,
    },
    /// Write plot data for the chord construction.
    Chords {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Simulate { config, seed } => commands::simulate(&config, seed, &mut stdout),
        Command::Sweep { config, out, seed, grid } => commands::sweep(&config, &out, seed, grid, &mut stdout),
        Command::CheckRule { kind, grid } => commands::check_rule(&kind, grid, &mut stdout),
        Command::Chords { config, out } => commands::chords(&config, &out, &mut stdout),
    };
    let code = match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
