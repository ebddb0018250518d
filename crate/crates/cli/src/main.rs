//! `mbmom`: exact solvers for closed product-form queueing networks.

mod commands;
mod model_file;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbmom::costmodel::CostAlgorithm;
use mbmom::{Branching, SolveOptions};
use serde::Serialize;

use commands::{Algorithm, CmdResult, Counts, Failure};

#[derive(Debug, Parser)]
#[command(name = "mbmom", version, about = "Exact normalizing constants and mean indices of closed product-form networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one model and print G(m, N) and the mean indices.
    Solve {
        file: PathBuf,
        #[arg(long, short, value_enum, default_value = "mbmom")]
        algorithm: Algorithm,
        /// Branching factor for mbmom: `max` (= M) or an integer in 1..=M.
        #[arg(long, short, default_value = "max")]
        branching: Branching,
        /// Fail on singular steps instead of filling them by convolution.
        #[arg(long)]
        no_fallback: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run every feasible algorithm and compare all entries exactly.
    Compare {
        file: PathBuf,
        #[arg(long)]
        no_fallback: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print a model file with every rational in canonical `p` or `p/q` form.
    Format { file: PathBuf },
    /// Emit the per-iteration time and space cost surface as CSV.
    Cost {
        /// Queue counts: `a..b`, `a,b,c`, or a single value.
        #[arg(long, default_value = "2..11", value_parser = commands::parse_range)]
        queues: Counts,
        #[arg(long, default_value = "2..11", value_parser = commands::parse_range)]
        classes: Counts,
        #[arg(long, default_value_t = 100)]
        population: u64,
        /// Comma-separated subset of mom, mb-b1, mb-bm.
        #[arg(long, value_delimiter = ',', default_value = "mom,mb-b1,mb-bm")]
        algorithms: Vec<CostAlgorithm>,
        /// Write to this file instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Exact probability of one state (all multiplicities must be 1).
    Prob {
        file: PathBuf,
        /// Per-class job counts at one queue, in file order; repeat per queue.
        #[arg(long = "queue", value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
        queues: Vec<String>,
        /// Per-class job counts at the delay station.
        #[arg(long, value_delimiter = ',')]
        delay: Vec<u32>,
        #[arg(long)]
        json: bool,
    },
}

fn options(no_fallback: bool) -> SolveOptions {
    SolveOptions { fallback: !no_fallback, ..SolveOptions::default() }
}

/// Writes to stdout, ignoring a closed pipe (`mbmom ... | head`).
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce(&T) -> String) {
    if json {
        out(&(serde_json::to_string_pretty(report).expect("reports serialize") + "\n"));
    } else {
        out(&text(report));
    }
}

/// `--queue 1,0 --queue 0,2` arrives as one flat list of groups because of
/// the delimiter, so each occurrence is re-read from the raw matches.
fn queue_rows(matches: &clap::ArgMatches) -> Result<Vec<Vec<u32>>, Failure> {
    let Some(sub) = matches.subcommand_matches("prob") else { return Ok(vec![]) };
    let Some(groups) = sub.get_occurrences::<String>("queues") else { return Ok(vec![]) };
    groups
        .map(|group| {
            group
                .map(|v| v.trim().parse::<u32>().map_err(|_| Failure::usage(anyhow::anyhow!("bad job count `{v}`"))))
                .collect()
        })
        .collect()
}

fn dispatch(cli: Cli, matches: &clap::ArgMatches) -> CmdResult<bool> {
    match cli.command {
        Command::Solve { file, algorithm, branching, no_fallback, json } => {
            let report = commands::solve(&file, algorithm, branching, options(no_fallback))?;
            emit(json, &report, |r| r.render());
            Ok(true)
        }
        Command::Compare { file, no_fallback, json } => {
            let report = commands::compare(&file, options(no_fallback))?;
            emit(json, &report, |r| r.render());
            Ok(report.all_equal)
        }
        Command::Format { file } => {
            let loaded = commands::load(&file)?;
            let f = &loaded.file;
            let canonical = model_file::ModelFile::from_model(&f.name, &f.class_names(), &f.queue_names(), &loaded.model);
            out(&(canonical.to_json() + "\n"));
            Ok(true)
        }
        Command::Cost { queues, classes, population, algorithms, output } => {
            commands::cost(&queues.0, &classes.0, population, &algorithms, output.as_deref())?;
            Ok(true)
        }
        Command::Prob { file, delay, json, .. } => {
            let rows = queue_rows(matches)?;
            let report = commands::prob(&file, &rows, &delay)?;
            emit(json, &report, |r| r.render());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    use clap::{CommandFactory, FromArgMatches};
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli, &matches) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: algorithms disagree");
            ExitCode::from(2)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
