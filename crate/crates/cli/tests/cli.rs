use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use warpd_cli::run::read_trace;

fn warpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpd")).args(args).output().unwrap()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const TRIVIAL: &str = include_str!("../configs/trivial.json");

#[test]
fn trivial_demo_converges_and_creates_nested_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("does/not/exist/yet");
    let o = warpd(&["demo", "trivial", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!(s["final"]["error_to_truth"].as_f64().unwrap() <= 1e-10);
    let rows = read_trace(&out.join("trace.csv")).unwrap();
    assert!(!rows.is_empty());
}

#[test]
fn solve_reads_a_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, TRIVIAL).unwrap();
    let out = tmp.path().join("o");
    let o = warpd(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trace-stride", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&out)["config"]["trace_stride"], 3);
}

#[test]
fn malformed_json_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{ \"instance\": ").unwrap();
    assert_eq!(warpd(&["solve", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("extra.json");
    let mut v: serde_json::Value = serde_json::from_str(TRIVIAL).unwrap();
    v["solver"]["momentum"] = serde_json::json!(0.9);
    fs::write(&cfg, v.to_string()).unwrap();
    let o = warpd(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("momentum"));
}

#[test]
fn missing_config_file_exits_2() {
    assert_eq!(warpd(&["solve", "/nonexistent/warpd.json"]).status.code(), Some(2));
}

#[test]
fn unknown_demo_exits_2() {
    let o = warpd(&["demo", "no-such-family"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown demo"));
}

#[test]
fn bad_thread_count_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, TRIVIAL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_warpd"))
        .args(["bench", cfg.to_str().unwrap()])
        .env("WARPD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = warpd(&["demo", "sparse-gaussian", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read_trace(&out.join("trace.csv"))
            .unwrap()
            .into_iter()
            .map(|mut r| {
                r.wall_seconds = 0.0;
                r
            })
            .collect::<Vec<_>>()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
}

#[test]
fn bench_reports_nan_for_unreached_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(TRIVIAL).unwrap();
    v["bench"] = serde_json::json!({ "algorithms": ["warpd", "pd"], "tolerances": [5e-2, 1e-300], "repeats": 2, "max_iters": 200 });
    let cfg = tmp.path().join("b.json");
    fs::write(&cfg, v.to_string()).unwrap();
    let out = tmp.path().join("bench");
    let o = Command::new(env!("CARGO_BIN_EXE_warpd"))
        .args(["bench", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("WARPD_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(out.join("bench.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let tol: f64 = r[1].parse().unwrap();
        let iters: f64 = r[2].parse().unwrap();
        if tol < 1e-100 {
            assert!(iters.is_nan(), "{r:?}");
        } else {
            assert!(iters.is_finite() && iters <= 200.0, "{r:?}");
        }
    }
}

#[test]
fn square_root_variant_recovers_a_completed_matrix() {
    // Regression: with the constrained-form Ĉ₂ = 1 the penalised minimiser is the zero matrix.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sr");
    let cfg = serde_json::json!({
        "instance": { "family": "matrix-completion", "n1": 40, "n2": 50, "r": 2, "p": 0.5, "seed": 3 },
        "solver": { "algorithm": "warpd-sr", "l": 1.0, "ergodic": false, "n_restarts": 6 },
        "output": { "dir": out },
        "trace_stride": 0
    });
    let path = tmp.path().join("sr.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = warpd(&["solve", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!(s["final"]["rel_error_to_truth"].as_f64().unwrap() < 1e-6, "{}", s["final"]);
}
