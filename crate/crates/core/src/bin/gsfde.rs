use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gsfde::runner::{error_exit_code, run, Subcommand};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Simulate,
    Picard,
    Verify,
    Bdg,
    ExpEstimate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => Subcommand::Simulate,
            Command::Picard => Subcommand::Picard,
            Command::Verify => Subcommand::Verify,
            Command::Bdg => Subcommand::Bdg,
            Command::ExpEstimate => Subcommand::ExpEstimate,
        }
    }
}

/// Simulate and check functional SDEs driven by G-Lévy noise.
#[derive(Parser)]
#[command(name = "gsfde", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = Subcommand::from(cli.command);
    match run(sub, &cli.config, cli.out.as_deref(), cli.seed) {
        Ok(outcome) => {
            for r in &outcome.reports {
                println!(
                    "{:<16} {:<28} lhs={:<12.6e} rhs={:<12.6e} {}",
                    r.check, r.name, r.lhs, r.rhs, r.holds
                );
            }
            for a in &outcome.artifacts {
                eprintln!("wrote {}", a.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("gsfde {sub}: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
