//! End-to-end tests of the `hesga` binary: exit codes, artifact layout,
//! rerun determinism, seed overrides, and the report/cost flows. Every test
//! drives the compiled binary through `std::process::Command`, exactly as a
//! shell user would.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

/// Runs the binary with `args`. `seed` sets HESGA_SEED for the child; the
/// variable is otherwise scrubbed so an ambient value cannot leak in.
fn hesga(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hesga"));
    cmd.args(args);
    cmd.env_remove("HESGA_SEED");
    if let Some(seed) = seed {
        cmd.env("HESGA_SEED", seed);
    }
    cmd.output().expect("binary executes")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn assert_code(out: &Output, want: i32) {
    assert_eq!(
        out.status.code(),
        Some(want),
        "exit code; stderr:\n{}",
        stderr_of(out)
    );
}

/// Writes `config` as pretty JSON under `dir` and returns its path.
fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).expect("config written");
    path
}

/// A noiseless two-dimensional curve config over a 6-bit space, cheap enough
/// to run dozens of times per test binary.
fn synth_config(output_dir: &Path, algorithm: Value, trials: u64, master_seed: u64) -> Value {
    json!({
        "search_space": [
            {"name": "x", "bits": 3, "step": 1.0, "kind": "integer"},
            {"name": "y", "bits": 3, "step": 1.0, "kind": "integer"}
        ],
        "objective": {
            "type": "synthetic_curve",
            "asymptote": {
                "base": 0.2,
                "terms": [
                    {"dim": 0, "linear": 0.0131, "quad": 0.0113, "center": 2.37},
                    {"dim": 1, "linear": 0.0071, "quad": 0.0053, "center": 2.63}
                ]
            },
            "gap": {"rule": "aligned_start", "start": 2.0},
            "decay": {"base": 0.4},
            "noise_sigma": 0.0
        },
        "algorithm": algorithm,
        "trials": trials,
        "master_seed": master_seed,
        "output_dir": output_dir.to_str().unwrap()
    })
}

fn small_hesga() -> Value {
    json!({"type": "hesga", "n_pop": 6, "maxgen": 4, "n_e": 10})
}

#[test]
fn run_writes_artifacts_and_reruns_byte_identically() {
    let tmp = TempDir::new().unwrap();
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    let cfg = write_config(
        tmp.path(),
        "run.json",
        &synth_config(&out1, small_hesga(), 2, 11),
    );

    let out = hesga(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("hesga: 2 trials complete"), "stdout: {text}");
    assert!(text.contains("best rmse: "), "stdout: {text}");
    assert!(text.contains("summary: "), "stdout: {text}");

    // Layout: manifest, summary, and one directory per trial.
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["trial_seeds"].as_array().unwrap().len(), 2);
    assert!(manifest["finished"].is_string());
    for trial in 0..2 {
        let dir = out1.join(format!("trial_{trial}"));
        assert!(dir.join("history.csv").is_file());
        assert!(dir.join("best.json").is_file());
        let best: Value =
            serde_json::from_str(&fs::read_to_string(dir.join("best.json")).unwrap()).unwrap();
        assert!(best["rmse"].is_number());
        assert_eq!(best["genome"].as_str().unwrap().len(), 6);
    }

    // History: header plus one row per generation.
    let history = fs::read_to_string(out1.join("trial_0/history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gen,best_rmse,ev_fast,ev_full,epoch_units"
    );
    assert_eq!(lines.count(), 4, "one row per generation");

    // The same config into a fresh directory reproduces every result byte.
    let out = hesga(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_code(&out, 0);
    for file in [
        "summary.csv",
        "trial_0/history.csv",
        "trial_0/best.json",
        "trial_1/history.csv",
        "trial_1/best.json",
    ] {
        assert_eq!(
            fs::read(out1.join(file)).unwrap(),
            fs::read(out2.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn seed_override_changes_seeds_and_rejects_garbage() {
    let tmp = TempDir::new().unwrap();
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    let cfg = write_config(
        tmp.path(),
        "run.json",
        &synth_config(&out1, small_hesga(), 1, 11),
    );

    assert_code(&hesga(&["run", "--config", cfg.to_str().unwrap()], None), 0);
    let out = hesga(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out2.to_str().unwrap(),
        ],
        Some("99"),
    );
    assert_code(&out, 0);

    let seed_column = |dir: &Path| -> String {
        let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string()
    };
    assert_ne!(
        seed_column(&out1),
        seed_column(&out2),
        "HESGA_SEED must change the trial seed"
    );

    let out = hesga(&["run", "--config", cfg.to_str().unwrap()], Some("banana"));
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("HESGA_SEED"));
}

#[test]
fn config_errors_exit_two_before_running() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("never");

    // Unknown top-level field.
    let mut bad = synth_config(&out_dir, small_hesga(), 1, 1);
    bad["populations"] = json!(5);
    let cfg = write_config(tmp.path(), "unknown_field.json", &bad);
    let out = hesga(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 2);
    assert!(stderr_of(&out).starts_with("error: "));

    // Unknown algorithm type.
    let bad = synth_config(&out_dir, json!({"type": "annealing", "n_e": 10}), 1, 1);
    let cfg = write_config(tmp.path(), "unknown_algo.json", &bad);
    assert_code(&hesga(&["run", "--config", cfg.to_str().unwrap()], None), 2);

    // Subcommand/algorithm mismatches, both directions.
    let random = synth_config(
        &out_dir,
        json!({"type": "random", "n_e": 10, "budget_full_evals": 5}),
        1,
        1,
    );
    let cfg = write_config(tmp.path(), "random.json", &random);
    let out = hesga(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("use `baseline`"));

    let hesga_cfg = synth_config(&out_dir, small_hesga(), 1, 1);
    let cfg = write_config(tmp.path(), "hesga.json", &hesga_cfg);
    let out = hesga(&["baseline", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("use `run`"));

    // Zero worker threads is a configuration error, not a hang.
    let out = hesga(
        &["run", "--config", cfg.to_str().unwrap(), "--parallel", "0"],
        None,
    );
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("--parallel"));

    // Nothing may have been written by any of the rejected invocations.
    assert!(!out_dir.exists());
}

#[test]
fn baselines_run_and_label_their_summaries() {
    let tmp = TempDir::new().unwrap();

    let out_r = tmp.path().join("random");
    let random = synth_config(
        &out_r,
        json!({"type": "random", "n_e": 10, "budget_full_evals": 5}),
        2,
        3,
    );
    let cfg = write_config(tmp.path(), "random.json", &random);
    let out = hesga(&["baseline", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("random: 2 trials complete"));

    let out_g = tmp.path().join("grid");
    let grid = synth_config(
        &out_g,
        json!({"type": "grid", "n_e": 10, "stride_bits": [2, 2]}),
        1,
        3,
    );
    let cfg = write_config(tmp.path(), "grid.json", &grid);
    let out = hesga(&["baseline", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("grid: 1 trials complete"));

    let summary = fs::read_to_string(out_r.join("summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.starts_with("random,")));
}

#[test]
fn oracle_prints_cardinality_and_is_idempotent() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("oracle");
    // A 13-bit space exercises the four-dimensional layout while staying
    // exhaustively enumerable in well under a second.
    let config = json!({
        "search_space": [
            {"name": "s_b", "bits": 3, "step": 32.0, "kind": "integer"},
            {"name": "n_f", "bits": 3, "step": 32.0, "kind": "integer"},
            {"name": "r_l", "bits": 4, "step": 0.0001, "kind": "real"},
            {"name": "n_n", "bits": 3, "step": 64.0, "kind": "integer"}
        ],
        "objective": {
            "type": "synthetic_curve",
            "asymptote": {
                "base": 0.2,
                "terms": [{"dim": 2, "linear": 100.0, "quad": 0.0, "center": 0.0008}]
            },
            "gap": {"rule": "aligned_start", "start": 2.0},
            "decay": {"base": 0.4},
            "noise_sigma": 0.0
        },
        "algorithm": {"type": "hesga", "n_pop": 6, "maxgen": 4, "n_e": 12},
        "trials": 1,
        "master_seed": 5,
        "output_dir": out_dir.to_str().unwrap()
    });
    let cfg = write_config(tmp.path(), "oracle.json", &config);

    let out = hesga(&["oracle", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("cardinality: 8192"), "stdout: {text}");
    assert!(text.contains("best: "), "stdout: {text}");
    let first = fs::read(out_dir.join("oracle.csv")).unwrap();
    assert!(!first.is_empty());

    let out = hesga(&["oracle", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert_eq!(
        first,
        fs::read(out_dir.join("oracle.csv")).unwrap(),
        "oracle output must not depend on when it is computed"
    );
}

#[test]
fn report_summarizes_and_tests_pairs() {
    let tmp = TempDir::new().unwrap();
    let out_h = tmp.path().join("h");
    let out_r = tmp.path().join("r");
    let cfg_h = write_config(
        tmp.path(),
        "h.json",
        &synth_config(&out_h, small_hesga(), 3, 11),
    );
    let cfg_r = write_config(
        tmp.path(),
        "r.json",
        &synth_config(
            &out_r,
            json!({"type": "random", "n_e": 10, "budget_full_evals": 5}),
            3,
            11,
        ),
    );
    assert_code(&hesga(&["run", "--config", cfg_h.to_str().unwrap()], None), 0);
    assert_code(
        &hesga(&["baseline", "--config", cfg_r.to_str().unwrap()], None),
        0,
    );
    let sum_h = out_h.join("summary.csv");
    let sum_r = out_r.join("summary.csv");

    // Two sets: a summary row each plus exactly one pair row.
    let out = hesga(
        &["report", sum_h.to_str().unwrap(), sum_r.to_str().unwrap()],
        None,
    );
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("hesga vs random"), "stdout: {text}");
    assert!(
        text.contains("section,label,n,mean_rmse,std_rmse,t,dof,alpha,h"),
        "stdout: {text}"
    );
    let pair_rows = text.lines().filter(|l| l.starts_with("pair,")).count();
    assert_eq!(pair_rows, 1);

    // One set: summaries only.
    let out = hesga(&["report", sum_h.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert!(!stdout_of(&out).contains("pair,"));

    // --out writes the CSV file instead of appending it to stdout.
    let report_file = tmp.path().join("cmp.csv");
    let out = hesga(
        &[
            "report",
            sum_h.to_str().unwrap(),
            sum_r.to_str().unwrap(),
            "--alpha",
            "0.2",
            "--out",
            report_file.to_str().unwrap(),
        ],
        None,
    );
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("report: "));
    let written = fs::read_to_string(&report_file).unwrap();
    assert!(written.starts_with("section,label,n,mean_rmse,std_rmse,t,dof,alpha,h"));

    // A report CSV is not a trial summary; feeding one back is a config error.
    let out = hesga(&["report", report_file.to_str().unwrap()], None);
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("unrecognized summary header"));
}

#[test]
fn cost_predicts_published_budgets() {
    let tmp = TempDir::new().unwrap();
    let unused = tmp.path().join("unused");

    let hesga_cfg = synth_config(
        &unused,
        json!({"type": "hesga", "n_pop": 10, "maxgen": 10, "n_e": 100}),
        1,
        1,
    );
    let cfg = write_config(tmp.path(), "hesga_cost.json", &hesga_cfg);
    let out = hesga(&["cost", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert_eq!(stdout_of(&out), "predicted epoch units: 3000\n");

    let trad = synth_config(
        &unused,
        json!({"type": "traditional_ga", "n_pop": 10, "maxgen": 10, "n_e": 100}),
        1,
        1,
    );
    let cfg = write_config(tmp.path(), "trad_cost.json", &trad);
    let out = hesga(&["cost", "--config", cfg.to_str().unwrap()], None);
    assert_code(&out, 0);
    assert_eq!(stdout_of(&out), "predicted epoch units: 11000\n");
}

#[test]
fn cost_checks_a_finished_run_and_flags_tampering() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.json",
        &synth_config(&out_dir, small_hesga(), 2, 11),
    );
    assert_code(&hesga(&["run", "--config", cfg.to_str().unwrap()], None), 0);

    let out = hesga(
        &["cost", "--config", cfg.to_str().unwrap(), out_dir.to_str().unwrap()],
        None,
    );
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("measured epoch units: "), "stdout: {text}");
    assert!(text.contains("measurement matches prediction"), "stdout: {text}");

    // Bump one trial's epoch_units column; the check must now fail loudly.
    let summary_path = out_dir.join("summary.csv");
    let summary = fs::read_to_string(&summary_path).unwrap();
    let mut lines: Vec<String> = summary.lines().map(str::to_string).collect();
    let (prefix, units) = lines[1].rsplit_once(',').unwrap();
    let bumped: u64 = units.parse::<u64>().unwrap() + 1;
    lines[1] = format!("{prefix},{bumped}");
    fs::write(&summary_path, lines.join("\n") + "\n").unwrap();

    let out = hesga(
        &["cost", "--config", cfg.to_str().unwrap(), out_dir.to_str().unwrap()],
        None,
    );
    assert_code(&out, 1);
    assert!(
        stderr_of(&out).contains("epoch units; the configuration predicts"),
        "stderr: {}",
        stderr_of(&out)
    );
}
