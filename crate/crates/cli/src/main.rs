use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use limred_cli::commands::{self, Outcome};
use limred_cli::{CliResult, Grid};
use limred_core::Interval;

/// Limited-interval model order reduction.
#[derive(Debug, Parser)]
#[command(name = "limred", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    s.parse().map_err(|e: limred_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every method of a configuration and write the report, reduced
    /// models and response data.
    Reduce {
        config: PathBuf,
        /// Run the methods one after another instead of concurrently.
        #[arg(long)]
        serial: bool,
    },
    /// Limited H2 norms of a system, and errors of a reduced model.
    Norms {
        system: PathBuf,
        /// `unlimited`, `time:t1,t2` or `freq:w1,w2` (`inf` allowed); repeatable.
        #[arg(long, value_parser = parse_interval)]
        interval: Vec<Interval>,
        /// Reduced model to compare against.
        #[arg(long)]
        rom: Option<PathBuf>,
    },
    /// Limited Gramians and Hankel-type singular values.
    Gramians {
        system: PathBuf,
        #[arg(long, value_parser = parse_interval, default_value = "unlimited")]
        interval: Interval,
    },
    /// Error sigma response and impulse responses of a reduced model.
    Response {
        system: PathBuf,
        rom: PathBuf,
        /// `lo, hi, points` in rad/s.
        #[arg(long, default_value = "0, 10, 200")]
        freq_grid: Grid,
        /// `lo, hi, points` in seconds.
        #[arg(long, default_value = "0, 10, 500")]
        time_grid: Grid,
        #[arg(long, default_value = ".")]
        output: PathBuf,
        /// Prefix of the written files.
        #[arg(long, default_value = "response")]
        name: String,
    },
    /// Check that a system file parses and is Hurwitz.
    Validate { system: PathBuf },
}

fn dispatch(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Reduce { config, serial } => commands::reduce(&config, !serial),
        Command::Norms {
            system,
            interval,
            rom,
        } => commands::norms(&system, &interval, rom.as_deref()),
        Command::Gramians { system, interval } => commands::gramians(&system, &interval),
        Command::Response {
            system,
            rom,
            freq_grid,
            time_grid,
            output,
            name,
        } => commands::response(&system, &rom, &freq_grid, &time_grid, &output, &name),
        Command::Validate { system } => commands::validate(&system),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("limred: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
