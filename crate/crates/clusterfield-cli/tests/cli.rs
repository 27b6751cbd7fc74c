//! End-to-end tests for the `clusterfield` binary: exit codes, output
//! stability under a fixed seed, and file round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clusterfield"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_clustered_csv(dir: &Path) -> std::path::PathBuf {
    // one tight 1D cluster of radius well under eps = 0.005 (raw units)
    let path = dir.join("clustered.csv");
    let rows: String = (0..40)
        .map(|i| format!("{}\n", 10.0 + 1e-4 * (i % 7) as f64))
        .collect();
    std::fs::write(&path, rows).unwrap();
    path
}

fn write_spread_csv(dir: &Path) -> std::path::PathBuf {
    // three points pairwise >= delta = 0.02 apart (raw units)
    let path = dir.join("spread.csv");
    std::fs::write(&path, "0.0\n0.5\n1.0\n").unwrap();
    path
}

const EXAMPLE1: &[&str] = &["--k1", "1", "--eps", "0.005", "--k2", "2", "--delta", "0.02"];

#[test]
fn decide_clustered_yes_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_clustered_csv(dir.path());
    let args: Vec<&str> = ["decide", "--points", file.to_str().unwrap()]
        .iter()
        .chain(EXAMPLE1)
        .copied()
        .collect();
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "stderr: {}", String::from_utf8_lossy(&a.stderr));
    let out = stdout(&a);
    assert!(out.contains("scale_factor = "), "{out}");
    assert!(out.lines().last().unwrap().contains("YES"), "{out}");
    assert_eq!(out, stdout(&b), "same seed must reproduce the same report");
}

#[test]
fn decide_spread_no_with_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_spread_csv(dir.path());
    let report = dir.path().join("report.json");
    let mut args: Vec<&str> = ["decide", "--points", file.to_str().unwrap()]
        .iter()
        .chain(EXAMPLE1)
        .copied()
        .collect();
    args.extend(["--out", report.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success());
    assert!(stdout(&o).lines().last().unwrap().contains("NO"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "No");
    assert_eq!(json["seed"], 42);
}

#[test]
fn missing_points_file_exits_3() {
    let args: Vec<&str> = ["decide", "--points", "/nonexistent/points.csv"]
        .iter()
        .chain(EXAMPLE1)
        .copied()
        .collect();
    let o = run(&args);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    // unknown flag (clap) and a domain error (eps >= delta) both exit 2
    let o = run(&["decide", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let file = write_spread_csv(dir.path());
    let o = run(&[
        "decide", "--points", file.to_str().unwrap(), "--k1", "1", "--eps", "0.5", "--k2", "2",
        "--delta", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ed_table_matches_published_values() {
    let o = run(&["ed-table"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("d,e_d"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "1,0.2048");
    assert_eq!(rows[9], "10,0.1661");
}

#[test]
fn kernel1d_json_and_curve_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("kernel.json");
    let curve_path = dir.path().join("curve.csv");
    let o = run(&[
        "kernel1d", "--eps", "0.01", "--c", "0.99", "--delta", "0.1", "--terms", "60", "--grid",
        "400", "--out", json_path.to_str().unwrap(), "--curve-out", curve_path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let k_delta: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("k(delta) = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.30..=0.37).contains(&k_delta), "{k_delta}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["basis"], "cosine");
    assert_eq!(json["meta"]["eps"], 0.01);
    let curve = std::fs::read_to_string(&curve_path).unwrap();
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "t,k,gaussian");
    assert_eq!(lines.len(), 402); // header + 401 samples on [0,1]
}

#[test]
fn bound_hierarchy_reports_both_stages() {
    let o = run(&["bound", "--mode", "hierarchy", "--p1", "0.99", "--step", "0.01"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("stage 1: p5 >= 0.76"), "{out}");
    assert!(out.contains("stage 2: p2 >= 0.2"), "{out}");
}

#[test]
fn simulate_inproc_matches_decide_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_clustered_csv(dir.path());
    let mut args: Vec<&str> = ["simulate", "--nodes", "4", "--points", file.to_str().unwrap()]
        .iter()
        .chain(EXAMPLE1)
        .copied()
        .collect();
    args.extend(["--draws", "500"]);
    let o = run(&args);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("bytes_sent = 32000"), "4 nodes * 500 draws * 16: {out}");
    assert!(out.lines().last().unwrap().contains("YES"), "{out}");
}
