//! `tapelearn`: experiment harness for rule-table learners.
//!
//! Exit status: 0/1/2 for an accepted/rejected/stuck `run`, 0 for other
//! successful commands, 64 for usage, file and parse errors, 65 when the
//! oracle cannot decide a run, 70 when a checked relation fails.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tapelearn::ModeKind;

use config::{parse_list, CommonArgs, ExperimentConfig};
use error::{CliError, EXIT_USAGE, EXIT_VIOLATION};

#[derive(Parser)]
#[command(name = "tapelearn", version, about = "Run, enumerate, compare and evolve rule-table learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one learner on one input.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        input: String,
    },
    /// List each table's class, their union and the learner's class.
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate sequential against parallel time, space and storage.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the payoff matrix of learner strategies and run replicator dynamics.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Strategies as modes, e.g. `par,seq,hybrid`.
        #[arg(long, default_value = "par,seq")]
        strategies: String,
        /// Initial shares, one per strategy; uniform if omitted.
        #[arg(long)]
        shares: Option<String>,
        #[arg(long, default_value_t = 200)]
        generations: u64,
        /// Also write the payoff matrix as CSV here.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Check class, storage, time and space relations on the loaded tables
    /// (the bundled fixtures by default) and on seeded random table sets.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        random_sets: usize,
        /// History manifest with `t<i> mode=<seq|par|hybrid> tables=<a,b>` lines.
        #[arg(long)]
        history: Option<String>,
    },
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run { common, input } => {
            let cfg = ExperimentConfig::from_args(&common)?;
            let (report, status) = commands::run::run(&cfg, &input)?;
            report.emit(cfg.format, cfg.out.as_deref())?;
            Ok(status)
        }
        Command::Enumerate { common } => {
            let cfg = ExperimentConfig::from_args(&common)?;
            commands::enumerate::enumerate(&cfg)?.emit(cfg.format, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Compare { common } => {
            let cfg = ExperimentConfig::from_args(&common)?;
            let (report, violations) = commands::compare::compare(&cfg)?;
            report.emit(cfg.format, cfg.out.as_deref())?;
            match violations.first() {
                None => Ok(0),
                Some(v) => Err(CliError::Violation(format!(
                    "{} violation(s); first: `{}` fails on {:?}",
                    violations.len(),
                    v.check,
                    v.string
                ))),
            }
        }
        Command::Evolve { common, strategies, shares, generations, matrix_out } => {
            let cfg = ExperimentConfig::from_args(&common)?;
            let strategies: Vec<ModeKind> = parse_list("--strategies", &strategies)?;
            let shares: Option<Vec<f64>> = shares.map(|s| parse_list("--shares", &s)).transpose()?;
            let args = commands::evolve::EvolveArgs {
                strategies: &strategies,
                shares: shares.as_deref(),
                generations,
                matrix_out: matrix_out.as_deref(),
            };
            commands::evolve::evolve(&cfg, &args)?.emit(cfg.format, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Report { common, random_sets, history } => {
            let cfg = ExperimentConfig::from_args_or_fixtures(&common)?;
            let (report, passed) = commands::report::report(&cfg, random_sets, history.as_deref())?;
            report.emit(cfg.format, cfg.out.as_deref())?;
            Ok(if passed { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("tapelearn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
