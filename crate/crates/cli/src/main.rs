use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use truthlab_cli::check::check;
use truthlab_cli::report::{exit_code, to_csv, to_json, Report};
use truthlab_cli::reproduce::{expand, reproduce, BoundParams};
use truthlab_cli::run::{run, CoinMode};
use truthlab_core::model::Budget;
use truthlab_core::scalar::parse_rational;
use truthlab_core::BigRational;

#[derive(Parser)]
#[command(
    name = "truthlab",
    version,
    about = "Exact checks of truthful mechanisms and their lower bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Add wall-clock milliseconds to each report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    /// Enumeration budget for exhaustive searches.
    #[arg(long, env = "TRUTHLAB_BUDGET", global = true)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a lower or upper bound (`all` runs every bound).
    Reproduce {
        #[arg(long)]
        bound: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_parser = rational)]
        epsilon: Option<BigRational>,
        #[arg(long, value_parser = rational)]
        c: Option<BigRational>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Check a property of a scheduling mechanism over a type domain file.
    Check {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        domain: PathBuf,
    },
    /// Run one mechanism on an instance file.
    Run {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        instance: PathBuf,
        /// One bit per task, task 0 first.
        #[arg(long, conflicts_with = "expected")]
        coins: Option<String>,
        /// Average over every coin sequence.
        #[arg(long)]
        expected: bool,
    },
}

fn rational(text: &str) -> Result<BigRational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn timed(timing: bool, f: impl FnOnce() -> Report) -> Report {
    let start = Instant::now();
    let mut report = f();
    if timing {
        report.wall_ms = Some(start.elapsed().as_millis());
    }
    report
}

fn execute(cli: Cli) -> Result<Vec<Report>> {
    let budget = match cli.output.budget {
        Some(n) => Budget::new(n)?,
        None => Budget::default(),
    };
    let timing = cli.output.timing;
    Ok(match cli.command {
        Command::Reproduce {
            bound,
            m,
            epsilon,
            c,
            seed,
            instances,
        } => {
            let params = BoundParams {
                m,
                epsilon,
                c,
                seed,
                instances,
            };
            expand(&bound)
                .into_iter()
                .map(|id| timed(timing, || reproduce(id, &params, &budget)))
                .collect()
        }
        Command::Check {
            mechanism,
            property,
            domain,
        } => {
            vec![timed(timing, || check(&mechanism, &property, &domain, &budget))]
        }
        Command::Run {
            mechanism,
            instance,
            coins,
            expected,
        } => {
            let mode = match (coins, expected) {
                (Some(bits), _) => Some(CoinMode::Fixed(match bits.parse() {
                    Ok(c) => c,
                    Err(e) => bail!("--coins: {e}"),
                })),
                (None, true) => Some(CoinMode::Expected),
                (None, false) => None,
            };
            vec![timed(timing, || run(&mechanism, &instance, mode, &budget))]
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.output.format;
    let reports = match execute(cli) {
        Ok(reports) => reports,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let text = match format {
        Format::Json => to_json(&reports).map_err(anyhow::Error::from),
        Format::Csv => to_csv(&reports),
    };
    match text {
        Ok(text) => println!("{}", text.trim_end()),
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(exit_code(&reports) as u8)
}
