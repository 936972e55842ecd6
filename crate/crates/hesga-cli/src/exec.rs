//! Experiment execution and artifact persistence: trial loops, the run
//! manifest, and the summary/history CSV formats.
//!
//! Every run directory has the same layout:
//!
//! ```text
//! output_dir/
//!   manifest.json        written before trial 0, rewritten at completion
//!   summary.csv          one row per trial
//!   trial_{i}/
//!     history.csv        one row per generation (population algorithms)
//!     best.json          winning genome, decoded assignment, final RMSE
//! ```
//!
//! Numbers are serialized with the shortest representation that parses back
//! to the identical value, so reruns of a deterministic experiment produce
//! byte-identical CSVs regardless of worker count.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use hesga::baselines;
use hesga::eval::EvalBudget;
use hesga::ga::{BestCandidate, GenerationRecord, Hesga};
use hesga::seeds;
use hesga::stats::TrialSet;

use crate::config::{AlgorithmSpec, Experiment, RunConfigFile};

pub const SUMMARY_HEADER: [&str; 8] = [
    "label",
    "trial",
    "seed",
    "best_rmse",
    "best_genome",
    "ev_fast",
    "ev_full",
    "epoch_units",
];

pub const HISTORY_HEADER: [&str; 5] = ["gen", "best_rmse", "ev_fast", "ev_full", "epoch_units"];

/// One summary row: the outcome of a single seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub label: String,
    pub trial: usize,
    pub seed: u64,
    pub best_rmse: f64,
    pub best_genome: String,
    pub ev_fast: u64,
    pub ev_full: u64,
    pub epoch_units: u64,
}

/// Run metadata written alongside the results. The `running` copy exists
/// before the first evaluation; the `complete` rewrite fills in the end
/// timestamp and the file index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub status: String,
    pub started: String,
    pub finished: Option<String>,
    pub config: RunConfigFile,
    pub trial_seeds: Vec<u64>,
    pub files: Vec<String>,
}

/// Serialized form of one winning candidate.
#[derive(Debug, Serialize, Deserialize)]
pub struct BestFile {
    pub genome: String,
    pub rmse: f64,
    pub assignment: Vec<AssignmentEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub name: String,
    pub value: f64,
}

struct TrialOutput {
    best: BestCandidate,
    history: Vec<GenerationRecord>,
    budget: EvalBudget,
}

/// Executes every trial of the experiment and persists all artifacts under
/// its output directory. Returns the summary rows in trial order.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<TrialRow>> {
    fs::create_dir_all(&exp.output_dir)
        .with_context(|| format!("creating output directory {}", exp.output_dir.display()))?;

    let trial_seeds: Vec<u64> = (0..exp.config.trials)
        .map(|i| seeds::derive(&[exp.config.master_seed, seeds::TRIAL_TAG, i as u64]))
        .collect();

    let mut manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        status: "running".to_string(),
        started: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
        finished: None,
        config: exp.config.clone(),
        trial_seeds: trial_seeds.clone(),
        files: Vec::new(),
    };
    write_manifest(&exp.output_dir, &manifest)?;

    let label = exp.config.algorithm.label();
    let mut rows = Vec::with_capacity(exp.config.trials);
    let mut files = vec!["manifest.json".to_string(), "summary.csv".to_string()];

    for (trial, &seed) in trial_seeds.iter().enumerate() {
        let output = run_trial(exp, seed).with_context(|| format!("trial {trial}"))?;

        let trial_dir = exp.output_dir.join(format!("trial_{trial}"));
        fs::create_dir_all(&trial_dir)
            .with_context(|| format!("creating {}", trial_dir.display()))?;

        if !output.history.is_empty() {
            let path = trial_dir.join("history.csv");
            fs::write(&path, history_csv(&output.history))
                .with_context(|| format!("writing {}", path.display()))?;
            files.push(format!("trial_{trial}/history.csv"));
        }

        let best_path = trial_dir.join("best.json");
        let best_file = BestFile {
            genome: output.best.genome.to_string(),
            rmse: output.best.score.rmse,
            assignment: output
                .best
                .assignment
                .entries()
                .iter()
                .map(|(name, value)| AssignmentEntry {
                    name: name.clone(),
                    value: *value,
                })
                .collect(),
        };
        let mut best_json = serde_json::to_string_pretty(&best_file)?;
        best_json.push('\n');
        fs::write(&best_path, best_json)
            .with_context(|| format!("writing {}", best_path.display()))?;
        files.push(format!("trial_{trial}/best.json"));

        rows.push(TrialRow {
            label: label.to_string(),
            trial,
            seed,
            best_rmse: output.best.score.rmse,
            best_genome: output.best.genome.to_string(),
            ev_fast: output.budget.ev_fast,
            ev_full: output.budget.ev_full,
            epoch_units: output.budget.epoch_units,
        });
    }

    let summary_path = exp.output_dir.join("summary.csv");
    fs::write(&summary_path, summary_csv(&rows))
        .with_context(|| format!("writing {}", summary_path.display()))?;

    manifest.status = "complete".to_string();
    manifest.finished = Some(Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true));
    manifest.files = files;
    write_manifest(&exp.output_dir, &manifest)?;

    Ok(rows)
}

fn run_trial(exp: &Experiment, seed: u64) -> Result<TrialOutput> {
    let obj = exp.objective.as_ref();
    match &exp.config.algorithm {
        AlgorithmSpec::Hesga(spec) => {
            let outcome = Hesga::new(spec.to_config(seed), &exp.space, obj)?.run()?;
            Ok(TrialOutput {
                best: outcome.best,
                history: outcome.history,
                budget: outcome.budget,
            })
        }
        AlgorithmSpec::TraditionalGa(spec) => {
            let outcome = baselines::traditional_ga(&exp.space, obj, &spec.to_config(seed))?;
            Ok(TrialOutput {
                best: outcome.best,
                history: outcome.history,
                budget: outcome.budget,
            })
        }
        AlgorithmSpec::Random(spec) => {
            let outcome = baselines::random_search(
                &exp.space,
                obj,
                spec.n_e,
                spec.budget_full_evals,
                seed,
            )?;
            Ok(TrialOutput {
                best: outcome.best,
                history: Vec::new(),
                budget: outcome.budget,
            })
        }
        AlgorithmSpec::Grid(spec) => {
            let outcome =
                baselines::grid_search(&exp.space, obj, spec.n_e, &spec.stride_bits, seed)?;
            Ok(TrialOutput {
                best: outcome.best,
                history: Vec::new(),
                budget: outcome.budget,
            })
        }
    }
}

/// Writes the manifest atomically: the new content lands under a temporary
/// name and replaces the old file in a single rename.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    let tmp = dir.join("manifest.json.tmp");
    let path = dir.join("manifest.json");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn summary_csv(rows: &[TrialRow]) -> String {
    let mut out = SUMMARY_HEADER.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.label,
            row.trial,
            row.seed,
            row.best_rmse,
            row.best_genome,
            row.ev_fast,
            row.ev_full,
            row.epoch_units
        ));
    }
    out
}

fn history_csv(history: &[GenerationRecord]) -> String {
    let mut out = HISTORY_HEADER.join(",");
    out.push('\n');
    for rec in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.gen, rec.best_rmse, rec.ev_fast, rec.ev_full, rec.epoch_units
        ));
    }
    out
}

/// Parses a summary CSV, insisting on the exact header this tool writes —
/// unknown or reordered columns are rejected rather than guessed at.
pub fn read_summary(path: &Path) -> Result<Vec<TrialRow>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().context("summary header")?.clone();
    if headers.iter().ne(SUMMARY_HEADER.iter().copied()) {
        bail!(
            "{}: unrecognized summary header \"{}\" (expected \"{}\")",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(","),
            SUMMARY_HEADER.join(",")
        );
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        let field = |j: usize| -> &str { record.get(j).unwrap_or("") };
        let parse_err = |col: &str| format!("{}: row {}: bad {}", path.display(), i + 1, col);
        rows.push(TrialRow {
            label: field(0).to_string(),
            trial: field(1).parse().with_context(|| parse_err("trial"))?,
            seed: field(2).parse().with_context(|| parse_err("seed"))?,
            best_rmse: field(3).parse().with_context(|| parse_err("best_rmse"))?,
            best_genome: field(4).to_string(),
            ev_fast: field(5).parse().with_context(|| parse_err("ev_fast"))?,
            ev_full: field(6).parse().with_context(|| parse_err("ev_full"))?,
            epoch_units: field(7).parse().with_context(|| parse_err("epoch_units"))?,
        });
    }
    if rows.is_empty() {
        bail!("{}: no trial rows", path.display());
    }
    Ok(rows)
}

/// Turns one summary file into a labeled trial set over its best-RMSE
/// column. All rows must carry the same label.
pub fn summary_to_trial_set(path: &Path) -> Result<TrialSet> {
    let rows = read_summary(path)?;
    let label = rows[0].label.clone();
    if rows.iter().any(|r| r.label != label) {
        bail!("{}: mixed labels in one summary file", path.display());
    }
    let values: Vec<f64> = rows.iter().map(|r| r.best_rmse).collect();
    Ok(TrialSet::new(label, values)?)
}

/// The fixed epoch-unit total every trial of this experiment consumes, for
/// algorithms whose budget is seed-independent.
pub fn predicted_epoch_units(exp: &Experiment) -> Result<(f64, u64)> {
    match &exp.config.algorithm {
        AlgorithmSpec::Hesga(spec) => {
            let cfg = spec.to_config(exp.config.master_seed);
            Ok((hesga::ga::cost_in_epoch_units(&cfg), cfg.exact_epoch_units()))
        }
        AlgorithmSpec::TraditionalGa(spec) => {
            let cfg = spec.to_config(exp.config.master_seed);
            Ok((
                baselines::traditional_cost_in_epoch_units(&cfg),
                cfg.exact_epoch_units(),
            ))
        }
        AlgorithmSpec::Random(spec) => {
            let units = spec.budget_full_evals as u64 * spec.n_e as u64;
            Ok((units as f64, units))
        }
        AlgorithmSpec::Grid(spec) => {
            let free_bits: u32 = exp
                .space
                .dims()
                .iter()
                .zip(&spec.stride_bits)
                .map(|(dim, &stride)| dim.bits - stride)
                .sum();
            if free_bits >= 64 {
                bail!("grid too large to cost: 2^{free_bits} points");
            }
            let units = (1u64 << free_bits) * spec.n_e as u64;
            Ok((units as f64, units))
        }
    }
}

/// Resolves a report output path: a directory argument means
/// `<dir>/report.csv`, anything else is taken as the file itself.
pub fn report_path(out: &Path) -> PathBuf {
    if out.extension().is_some() {
        out.to_path_buf()
    } else {
        out.join("report.csv")
    }
}
