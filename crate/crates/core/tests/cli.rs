use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_dagpreempt");

fn dagpreempt(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("DAGPREEMPT_OUT").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// results.csv with the wall-clock columns dropped.
fn deterministic_rows(dir: &Path) -> Vec<String> {
    let mut reader = csv::Reader::from_path(dir.join("results.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| !headers[i].ends_with("scheduler_runtime")).collect();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            keep.iter().map(|&i| &r[i]).collect::<Vec<_>>().join(",")
        })
        .collect()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("experiment.toml");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn generate_run_validate_metrics() {
    let tmp = TempDir::new().unwrap();
    let workflow = tmp.path().join("workflow.json");
    let out = dagpreempt(&["generate", "--preset", "adversarial", "--seed", "7", "--out", path(&workflow)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let config = write_config(
        tmp.path(),
        "workload_file = \"workflow.json\"\nschedulers = [\"heft\"]\npolicies = [\"NP\"]\nseeds = [7]\nemit_gantt = true\nemit_events = true\n",
    );
    let results = tmp.path().join("out");
    let out = dagpreempt(&["run", "--config", path(&config), "--out", path(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(deterministic_rows(&results).len(), 1);
    assert!(results.join("summary.csv").exists());
    assert_eq!(std::fs::read_dir(results.join("events")).unwrap().count(), 1);

    let gantt = std::fs::read_dir(results.join("gantt")).unwrap().next().unwrap().unwrap().path();
    let out = dagpreempt(&["validate", "--workload", path(&workflow), "--gantt", path(&gantt)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("valid"));

    let out = dagpreempt(&["metrics", "--workload", path(&workflow), "--gantt", path(&gantt)]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut reader = csv::Reader::from_path(results.join("results.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(m["total_makespan"].as_f64().unwrap(), col("total_makespan"));
    assert_eq!(m["mean_flowtime"].as_f64().unwrap(), col("mean_flowtime"));
}

#[test]
fn broken_gantt_is_reported_invalid() {
    let tmp = TempDir::new().unwrap();
    let workflow = tmp.path().join("workflow.json");
    assert!(dagpreempt(&["generate", "--seed", "1", "--out", path(&workflow)]).status.success());
    let config = write_config(
        tmp.path(),
        "workload_file = \"workflow.json\"\nschedulers = [\"minmin\"]\npolicies = [\"P\"]\nseeds = [1]\n",
    );
    let results = tmp.path().join("out");
    assert!(dagpreempt(&["run", "--config", path(&config), "--out", path(&results), "--emit-gantt"])
        .status
        .success());
    let gantt = std::fs::read_dir(results.join("gantt")).unwrap().next().unwrap().unwrap().path();
    let mut entries: Vec<serde_json::Value> = serde_json::from_slice(&std::fs::read(&gantt).unwrap()).unwrap();
    // shifting every task to time zero breaks precedence or overlap somewhere
    for e in &mut entries {
        let len = e["finish"].as_f64().unwrap() - e["start"].as_f64().unwrap();
        e["start"] = 0.0.into();
        e["finish"] = len.into();
    }
    std::fs::write(&gantt, serde_json::to_string(&entries).unwrap()).unwrap();
    let out = dagpreempt(&["validate", "--workload", path(&workflow), "--gantt", path(&gantt)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let bad = write_config(tmp.path(), "schedulers = [\"heft\"]\npolicies = [\"0P\"]\nseeds = [1]\n[workload]\n");
    assert_eq!(dagpreempt(&["run", "--config", path(&bad)]).status.code(), Some(2));

    std::fs::write(&bad, "schedulers = [\"heft\"]\nunknown_key = 3\n").unwrap();
    assert_eq!(dagpreempt(&["run", "--config", path(&bad)]).status.code(), Some(2));

    let missing = tmp.path().join("nope.toml");
    assert_eq!(dagpreempt(&["run", "--config", path(&missing)]).status.code(), Some(4));
    assert_eq!(
        dagpreempt(&["validate", "--workload", path(&missing), "--gantt", path(&missing)]).status.code(),
        Some(4)
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "schedulers = [\"heft\", \"random\"]\npolicies = [\"P\", \"NP\", \"2P\"]\nseeds = [1]\n[workload]\ngraph_count = 6\n",
    );
    let one = tmp.path().join("one");
    let four = tmp.path().join("four");
    for (dir, workers) in [(&one, "1"), (&four, "4")] {
        let out = dagpreempt(&["run", "--config", path(&config), "--seed", "0..4", "--workers", workers, "--out", path(dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let rows = deterministic_rows(&one);
    assert_eq!(rows.len(), 4 * 2 * 3);
    assert_eq!(rows, deterministic_rows(&four));
}

#[test]
fn full_sweep_shape() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "schedulers = [\"heft\", \"cpop\", \"minmin\", \"maxmin\", \"random\"]\npolicies = [\"P\", \"NP\", \"KP\"]\nseeds = [0]\n[workload]\ngraph_count = 3\n",
    );
    let out_dir = tmp.path().join("sweep");
    let out = Command::new(BIN)
        .args(["run", "--config", path(&config), "--seed", "0..30"])
        .env("DAGPREEMPT_OUT", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(deterministic_rows(&out_dir).len(), 30 * 5 * 6);
    let summary = csv::Reader::from_path(out_dir.join("summary.csv")).unwrap().records().count();
    assert_eq!(summary, 5 * 6);
}
