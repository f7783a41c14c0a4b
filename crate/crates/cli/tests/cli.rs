use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bhalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhalign")).args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a phantom into `dir` and returns its template and subtomogram paths.
fn phantom(dir: &Path, extra: &[&str]) -> (String, String) {
    let mut args = vec!["phantom", "--out-dir", s(dir)];
    args.extend_from_slice(extra);
    let o = bhalign(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    (s(&dir.join("template.mrc")).to_string(), s(&dir.join("subtomo.mrc")).to_string())
}

const SMALL: [&str; 6] = ["--lmax", "16", "--bands", "4,8,14", "--shift-radius", "1"];

#[test]
fn phantom_is_deterministic_and_truth_is_unit() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    phantom(a.path(), &["--n", "32", "--seed", "7", "--snr", "1"]);
    phantom(b.path(), &["--n", "32", "--seed", "7", "--snr", "1"]);
    for f in ["template.mrc", "subtomo.mrc", "truth.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let truth = json(&a.path().join("truth.json"));
    let q: Vec<f64> = truth["quaternion"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-12);
    assert_eq!(truth["generator"], "chacha20");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&bhalign(&["phantom", "--n", "32"])), 2);
    assert_eq!(code(&bhalign(&["frobnicate"])), 2);
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32"]);
    let o = bhalign(&["align", "--template", &t, "--subtomo", &f, "--lmax", "16", "--bands", "12,7"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("increasing"));
    assert_eq!(code(&bhalign(&["phantom", "--out-dir", s(dir.path()), "--shift", "1,2"])), 2);
    assert_eq!(code(&bhalign(&["--threads", "0", "phantom", "--out-dir", s(dir.path())])), 2);
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.mrc");
    let o = bhalign(&["bandscan", "--template", s(&missing), "--subtomo", s(&missing)]);
    assert_eq!(code(&o), 4);
}

#[test]
fn template_aligns_to_itself() {
    let dir = TempDir::new().unwrap();
    let (t, _) = phantom(dir.path(), &["--n", "32", "--seed", "2"]);
    let report = dir.path().join("report.json");
    let mut args = vec!["align", "--template", &t, "--subtomo", &t, "--report", s(&report)];
    args.extend_from_slice(&SMALL);
    let o = bhalign(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    assert_eq!(r["result"]["shift"], serde_json::json!([0, 0, 0]));
    let w = r["result"]["rotation"]["w"].as_f64().unwrap().abs().min(1.0);
    assert!((2.0 * w.acos()).to_degrees() < 0.1);
    assert_eq!(r["band_energy_ratios"].as_array().unwrap().len(), 17);
    assert_eq!(r["config"]["l_max"], 16);
    assert!(r["version"].is_string() && r["times"]["total"].as_f64().unwrap() > 0.0);
    // round trip through the parser
    let text = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), r);
}

#[test]
fn recovers_noisy_wedged_phantom() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(
        dir.path(),
        &["--seed", "5", "--snr", "0.5", "--wedge", "60", "--rot-euler", "40,70,-20", "--shift", "1,0,-1"],
    );
    let report = dir.path().join("report.json");
    let truth = dir.path().join("truth.json");
    let o = bhalign(&[
        "align",
        "--template",
        &t,
        "--subtomo",
        &f,
        "--wedge",
        "60",
        "--shift-radius",
        "1",
        "--truth",
        s(&truth),
        "--report",
        s(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    assert_eq!(r["truth"]["shift_correct"], true);
    let err = r["truth"]["geodesic_error_deg"].as_f64().unwrap();
    assert!(err <= 1.5, "error {err}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("geodesic error"));
}

#[test]
fn bandscan_csv_shape() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32", "--seed", "3"]);
    let o = bhalign(&["bandscan", "--template", &t, "--subtomo", &f, "--lmax", "16"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("L,energy_ratio,eval_cost_fraction"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 17);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] && w[1][2] > w[0][2]));
    let last = rows.last().unwrap();
    assert_eq!((last[0], last[1], last[2]), (16.0, 0.0, 1.0));
    assert!(text.lines().last().unwrap().ends_with(",0,1"));
}

#[test]
fn bench_reports_ratio_and_agreement() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32", "--seed", "4", "--shift", "0,1,0"]);
    let report = dir.path().join("bench.json");
    let truth = dir.path().join("truth.json");
    let mut args =
        vec!["bench", "--template", &t, "--subtomo", &f, "--baseline-step", "4", "--truth", s(&truth), "--report", s(&report)];
    args.extend_from_slice(&SMALL);
    let o = bhalign(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    assert!(r["evaluation_ratio"].as_f64().unwrap() >= 1.0);
    assert_eq!(r["within_grid_resolution"], true);
    assert_eq!(r["baseline"]["evaluations"], 90 * 90 * 46);
    assert!(r["align_error_deg"].as_f64().unwrap() <= r["baseline"]["geodesic_error_deg"].as_f64().unwrap());
}

#[test]
fn expand_writes_coefficients_and_reconstruction() {
    let dir = TempDir::new().unwrap();
    let (t, _) = phantom(dir.path(), &["--n", "16", "--blobs", "3"]);
    let out = dir.path().join("coeffs.json");
    let back = dir.path().join("back.mrc");
    let o = bhalign(&["expand", "--input", &t, "--lmax", "6", "--out", s(&out), "--synthesize", s(&back)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&out);
    let count = d["count"].as_u64().unwrap();
    assert!(count > 0);
    assert_eq!(d["coefficients"].as_array().unwrap().len() as u64, count);
    assert_eq!(std::fs::metadata(&back).unwrap().len(), 1024 + 4 * 16 * 16 * 16);
}

#[test]
fn landscape_dump_has_every_sample() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32"]);
    let out = dir.path().join("slice.csv");
    let o = bhalign(&[
        "landscape", "--template", &t, "--subtomo", &f, "--lmax", "16", "--bands", "4,14", "--n-alpha", "24", "--n-beta",
        "5", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 24 * 5);
    assert!(String::from_utf8_lossy(&o.stdout).contains("L = 14"));
}

fn strip_times(mut v: Value) -> Value {
    v["times"] = Value::Null;
    v["threads"] = Value::Null;
    v["result"]["wall_time"] = Value::Null;
    v
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32", "--seed", "9", "--snr", "2", "--shift", "1,0,0"]);
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let report = dir.path().join(format!("r{threads}.json"));
        let mut args = vec!["--threads", threads, "align", "--template", &t, "--subtomo", &f, "--report", s(&report)];
        args.extend_from_slice(&SMALL);
        let o = bhalign(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(strip_times(json(&report)));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn non_convergence_exits_with_three_and_still_reports() {
    let dir = TempDir::new().unwrap();
    let (t, f) = phantom(dir.path(), &["--n", "32", "--seed", "6", "--snr", "0.5"]);
    let report = dir.path().join("report.json");
    let mut args = vec!["align", "--template", &t, "--subtomo", &f, "--newton-iter", "1", "--report", s(&report)];
    args.extend_from_slice(&SMALL);
    let o = bhalign(&args);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&report)["result"]["converged"], false);
}
