//! `threadrank`: index forum corpora, rank threads, and evaluate the
//! rankings.
//!
//! Threads are ranked either directly over their concatenated text (`vd`)
//! or by retrieving individual messages and fusing their scores with one of
//! thirteen voting techniques. The `eval`, `significance`, `sweep`,
//! `curve`, and `report` subcommands reproduce the usual evaluation
//! workflow: metric tables, paired randomization tests, cross-validated
//! parameter tuning, pool-size curves, and an all-methods comparison.
//!
//! Exit status: 0 on success, 1 when some queries failed but the rest were
//! processed, 2 on invalid input or configuration.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use threadrank_cli::commands::{self, Outcome};

#[derive(Parser)]
#[command(name = "threadrank", version, about = "Forum thread retrieval by voting fusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build message-level and virtual-document indexes from a corpus.
    Index(commands::IndexArgs),
    /// Rank threads for each query and write a TREC run.
    Search(commands::SearchArgs),
    /// Score a run against relevance judgments.
    Eval(commands::EvalArgs),
    /// Compare two runs with a paired randomization test.
    Significance(commands::SignificanceArgs),
    /// Tune μ and pool size by cross-validated grid search.
    Sweep(commands::SweepArgs),
    /// Trace mean AP as the message pool grows.
    Curve(commands::CurveArgs),
    /// Compare every method against the virtual-document baseline.
    Report(commands::ReportArgs),
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Index(args) => commands::cmd_index(args),
        Command::Search(args) => commands::cmd_search(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Significance(args) => commands::cmd_significance(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Curve(args) => commands::cmd_curve(args),
        Command::Report(args) => commands::cmd_report(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::PartialFailure) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
