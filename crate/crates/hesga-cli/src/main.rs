//! Command-line front end for the hierarchical multi-fidelity search
//! library: experiment execution, baselines, exhaustive oracles,
//! significance reports, and training-cost predictions.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (an evaluation or write
//! blew up mid-run; partial results are preserved), 2 on a configuration
//! error (nothing was executed).

mod config;
mod exec;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use hesga::objectives::{exhaustive_oracle, SeedPolicy};
use hesga::space::DEFAULT_ENUMERATION_LIMIT;
use hesga::stats::{comparison_report_with, TestKind};

use crate::config::{AlgorithmSpec, RunConfigFile};

#[derive(Parser)]
#[command(
    name = "hesga",
    version,
    about = "Hierarchical multi-fidelity genetic hyperparameter search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the hierarchical search over seeded independent trials.
    Run(RunArgs),
    /// Execute a comparison baseline (traditional_ga, random, or grid).
    Baseline(RunArgs),
    /// Exhaustively evaluate a small space and persist the ranked table.
    Oracle(RunArgs),
    /// Summarize trial sets and test pairwise differences in mean RMSE.
    Report(ReportArgs),
    /// Print the training cost a configuration will consume, in epoch units.
    Cost(CostArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation worker threads. Results never depend on this.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Summary CSV files, one trial set each.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Significance level for the two-tailed tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Use the pooled-variance test instead of the unequal-variance default.
    #[arg(long)]
    pooled: bool,
    /// Write the report CSV here (a directory gets report.csv inside it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Completed run directory; its measured epoch units are checked
    /// against the prediction.
    run_dir: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
enum CliError {
    /// The invocation or config file is wrong; nothing was executed.
    Config(anyhow::Error),
    /// Execution started and failed; partial artifacts may exist.
    Runtime(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => cmd_run(args, true),
        Command::Baseline(args) => cmd_run(args, false),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Report(args) => cmd_report(args),
        Command::Cost(args) => cmd_cost(args),
    }
}

/// HESGA_SEED overrides the configured master seed when set.
fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var("HESGA_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|err| CliError::Config(anyhow!("HESGA_SEED {text:?}: {err}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(err) => Err(CliError::Config(anyhow!("HESGA_SEED: {err}"))),
    }
}

/// Runs `body` inside a worker pool of the requested width, or the default
/// pool when no width was given.
fn with_pool<T>(parallel: Option<usize>, body: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match parallel {
        None => Ok(body()),
        Some(0) => Err(CliError::Config(anyhow!("--parallel: must be at least 1"))),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|err| CliError::Runtime(anyhow!(err)))?;
            Ok(pool.install(body))
        }
    }
}

fn cmd_run(args: RunArgs, want_hesga: bool) -> Result<(), CliError> {
    let seed = seed_override()?;
    let config = RunConfigFile::load(&args.config).map_err(CliError::Config)?;
    let is_hesga = matches!(config.algorithm, AlgorithmSpec::Hesga(_));
    if want_hesga && !is_hesga {
        return Err(CliError::Config(anyhow!(
            "`run` executes the hierarchical algorithm; this config selects {} — use `baseline`",
            config.algorithm.label()
        )));
    }
    if !want_hesga && is_hesga {
        return Err(CliError::Config(anyhow!(
            "`baseline` runs comparison algorithms; this config selects hesga — use `run`"
        )));
    }

    let exp = config.build(args.out, seed).map_err(CliError::Config)?;
    let rows = with_pool(args.parallel, || exec::run_experiment(&exp))?
        .map_err(CliError::Runtime)?;

    let best = rows
        .iter()
        .min_by(|a, b| {
            a.best_rmse
                .total_cmp(&b.best_rmse)
                .then_with(|| a.best_genome.cmp(&b.best_genome))
        })
        .expect("experiments have at least one trial");
    println!("{}: {} trials complete", exp.config.algorithm.label(), rows.len());
    println!(
        "best rmse: {} (trial {}, genome {})",
        best.best_rmse, best.trial, best.best_genome
    );
    println!("summary: {}", exp.output_dir.join("summary.csv").display());
    Ok(())
}

fn cmd_oracle(args: RunArgs) -> Result<(), CliError> {
    let seed = seed_override()?;
    let config = RunConfigFile::load(&args.config).map_err(CliError::Config)?;
    let exp = config.build(args.out, seed).map_err(CliError::Config)?;
    let n_e = exp.config.algorithm.n_e();
    let salt = exp.config.master_seed;

    let table = with_pool(args.parallel, || {
        exhaustive_oracle(
            &exp.space,
            exp.objective.as_ref(),
            n_e,
            SeedPolicy::PerGenomeHash { salt },
            DEFAULT_ENUMERATION_LIMIT,
        )
    })?
    .map_err(|err| match err {
        err @ hesga::Error::EnumerationTooLarge { .. } => CliError::Config(anyhow!(err)),
        err => CliError::Runtime(anyhow!(err)),
    })?;

    fs::create_dir_all(&exp.output_dir)
        .map_err(|err| CliError::Runtime(anyhow!("creating {}: {err}", exp.output_dir.display())))?;
    let path = exp.output_dir.join("oracle.csv");
    fs::write(&path, table.to_csv_string())
        .map_err(|err| CliError::Runtime(anyhow!("writing {}: {err}", path.display())))?;

    let best = table.best();
    println!("cardinality: {}", table.len());
    println!("best: {} rmse={} ({})", best.genome, best.score.rmse, best.assignment);
    println!("table: {}", path.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut sets = Vec::with_capacity(args.paths.len());
    for path in &args.paths {
        sets.push(exec::summary_to_trial_set(path).map_err(CliError::Config)?);
    }
    let kind = if args.pooled {
        TestKind::Pooled
    } else {
        TestKind::Welch
    };
    let report =
        comparison_report_with(&sets, args.alpha, kind).map_err(|err| CliError::Config(anyhow!(err)))?;
    let csv = report
        .to_csv_string()
        .map_err(|err| CliError::Runtime(anyhow!(err)))?;

    print!("{}", report.to_text());
    match &args.out {
        Some(out) => {
            let path = exec::report_path(out);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent).map_err(|err| {
                        CliError::Runtime(anyhow!("creating {}: {err}", parent.display()))
                    })?;
                }
            }
            fs::write(&path, &csv)
                .map_err(|err| CliError::Runtime(anyhow!("writing {}: {err}", path.display())))?;
            println!("report: {}", path.display());
        }
        None => {
            println!();
            print!("{csv}");
        }
    }
    Ok(())
}

fn cmd_cost(args: CostArgs) -> Result<(), CliError> {
    let config = RunConfigFile::load(&args.config).map_err(CliError::Config)?;
    let exp = config.build(None, None).map_err(CliError::Config)?;
    let (closed_form, exact) = exec::predicted_epoch_units(&exp).map_err(CliError::Config)?;

    println!("predicted epoch units: {closed_form}");
    if (closed_form - exact as f64).abs() > 1e-9 {
        // The closed form idealizes away the two-epoch floor on fast
        // evaluations and fractional promotion counts; the counter total
        // below is what a run actually reports.
        println!("exact counter total: {exact}");
    }

    if let Some(dir) = &args.run_dir {
        let rows = exec::read_summary(&dir.join("summary.csv")).map_err(CliError::Config)?;
        println!("measured epoch units: {}", rows[0].epoch_units);
        if let Some(bad) = rows.iter().find(|row| row.epoch_units != exact) {
            return Err(CliError::Runtime(anyhow!(
                "trial {} consumed {} epoch units; the configuration predicts {exact}",
                bad.trial,
                bad.epoch_units
            )));
        }
        println!("measurement matches prediction");
    }
    Ok(())
}
