use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"{
  "env": {"kind": "hypothesis", "seed": 6, "num_states": 4, "num_queries": 4, "alphabet": 2, "horizon": 3, "null_query": true},
  "train": {"steps": 6, "batch_size": 12, "metric_rollouts": 4, "arew_mode": "as_bt"},
  "diagnostics": {"n_rollouts": 50},
  "seeds": [0, 1]
}"#;

fn sellock(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sellock"));
    cmd.args(args).env_remove("SEL_LOCK_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn run_ok(config: &str, out: &Path, envs: &[(&str, &str)]) {
    let o = sellock(&["run", "--config", config, "--out", out.to_str().unwrap()], envs);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_steps_writes_header_and_initial_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &SMALL.replace("\"steps\": 6", "\"steps\": 0"));
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let csv = fs::read_to_string(out.join("metrics_seed0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("step,algorithm,arew_mode,lambda_inj,flip_alpha,mean_reward"));
    let summary = read_json(&out.join("summary.json"));
    let seed = &summary["seeds"][0];
    assert!(seed["initial"]["i_th"]["mean"].is_number());
    assert!(seed.get("final_window").is_none());
    let keys: Vec<&String> = summary["across_seeds"].as_object().unwrap().keys().collect();
    assert_eq!(keys, vec!["initial_C_BT", "initial_I_th"]);
}

#[test]
fn repeated_runs_and_thread_counts_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run_ok(&cfg, &a, &[]);
    run_ok(&cfg, &b, &[("SEL_LOCK_THREADS", "1")]);
    run_ok(&cfg, &c, &[("SEL_LOCK_THREADS", "3")]);
    for seed in [0, 1] {
        let name = format!("metrics_seed{seed}.csv");
        let first = fs::read(a.join(&name)).unwrap();
        assert_eq!(first, fs::read(b.join(&name)).unwrap());
        assert_eq!(first, fs::read(c.join(&name)).unwrap());
        assert_eq!(fs::read_to_string(a.join(&name)).unwrap().lines().count(), 7);
    }
    assert_eq!(read_json(&b.join("manifest.json"))["threads"], 1);
    assert_eq!(read_json(&c.join("manifest.json"))["threads"], 3);
}

#[test]
fn config_hash_ignores_key_order_and_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let reordered = r#"{
  "seeds": [0, 1],
  "diagnostics": {"n_rollouts": 50},
  "train": {"arew_mode": "as_bt", "metric_rollouts": 4, "batch_size": 12, "steps": 6, "learning_rate": 0.3},
  "env": {"null_query": true, "horizon": 3, "alphabet": 2, "num_queries": 4, "num_states": 4, "seed": 6, "kind": "hypothesis"}
}"#;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&write(tmp.path(), "a.json", SMALL), &a, &[]);
    run_ok(&write(tmp.path(), "b.json", reordered), &b, &[]);
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(ma["config"]["train"]["clip"], 0.2);
    assert_eq!(ma["seeds"][0]["metrics"], "metrics_seed0.csv");
}

#[test]
fn arew_run_reports_vanilla_gap_when_asked() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &SMALL.replace("\"seeds\"", "\"compare_vanilla\": true, \"seeds\""));
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let gap = &read_json(&out.join("summary.json"))["vanilla_gap"];
    assert_eq!(gap["per_seed_gap"].as_array().unwrap().len(), 2);
    assert!(out.join("metrics_seed1_vanilla.csv").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.json", &SMALL.replace("\"steps\": 6", "\"steps\": 6, \"learning_rate\": -1"));
    let o = sellock(&["run", "--config", &bad], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("train.learning_rate"));

    let unknown = write(tmp.path(), "unknown.json", &SMALL.replace("\"seeds\"", "\"sedes\": [], \"seeds\""));
    assert_eq!(sellock(&["run", "--config", &unknown], &[]).status.code(), Some(2));
    assert_eq!(sellock(&["run", "--config", "/nonexistent/c.json"], &[]).status.code(), Some(2));
    assert_eq!(sellock(&["verify", "bogus"], &[]).status.code(), Some(2));
    assert_eq!(sellock(&["frobnicate"], &[]).status.code(), Some(2));

    let good = write(tmp.path(), "good.json", SMALL);
    let o = sellock(&["run", "--config", &good, "--out", tmp.path().join("o").to_str().unwrap()], &[("SEL_LOCK_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));

    let empty = write(tmp.path(), "empty.json", "{}");
    assert_eq!(sellock(&["sweep", "--config", &good, "--grid", &empty], &[]).status.code(), Some(2));
    let empty_axis = write(tmp.path(), "axis.json", r#"{"flip_alpha": []}"#);
    assert_eq!(sellock(&["sweep", "--config", &good, "--grid", &empty_axis], &[]).status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL);
    let blocker = write(tmp.path(), "not_a_dir", "");
    let o = sellock(&["run", "--config", &cfg, "--out", &blocker], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn singleton_sweep_matches_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL);
    let grid = write(tmp.path(), "g.json", r#"{"arew_mode": ["as_bt"]}"#);
    let (run_out, sweep_out) = (tmp.path().join("run"), tmp.path().join("sweep"));
    run_ok(&cfg, &run_out, &[]);
    let o = sellock(&["sweep", "--config", &cfg, "--grid", &grid, "--out", sweep_out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in [0, 1] {
        let name = format!("metrics_seed{seed}.csv");
        assert_eq!(fs::read(run_out.join(&name)).unwrap(), fs::read(sweep_out.join("cell_000").join(&name)).unwrap());
    }
}

#[test]
fn flip_sweep_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &SMALL.replace("\"seeds\": [0, 1]", "\"seeds\": [0]"));
    let grid = write(tmp.path(), "g.json", r#"{"flip_alpha": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]}"#);
    let out = tmp.path().join("sweep");
    let o = sellock(&["sweep", "--config", &cfg, "--grid", &grid, "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("cell,flip_alpha,lambda_inj,arew_mode,algorithm"));
    assert!(lines[6].starts_with("5,0.5,"));
    assert_eq!(read_json(&out.join("manifest.json"))["cells"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_core_passes_and_reports_json() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let o = sellock(&["verify", "core", "--report", report.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&report);
    assert_eq!(r["suite"], "core");
    assert_eq!(r["passed"], true);
    let ids: Vec<&str> = r["results"].as_array().unwrap().iter().map(|x| x["id"].as_str().unwrap()).collect();
    assert_eq!(ids, vec!["A1", "A2", "A10", "csv_schema"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}
