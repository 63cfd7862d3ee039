use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperseg_core::cloud::{save_cloud, save_labels, synth_blobs, CloudFormat};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hyperseg"));
    cmd.env_remove("HYPERSEG_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Writes a labelled two-blob cloud as `<name>.xyz` plus `<name>.labels`.
fn fixture(dir: &Path, name: &str, seed: u64, labelled: bool) -> PathBuf {
    let cloud = synth_blobs(2, 30, 60.0, 1.0, seed).unwrap();
    let path = dir.join(format!("{name}.xyz"));
    save_cloud(&path, &cloud, CloudFormat::Xyz).unwrap();
    if labelled {
        save_labels(&dir.join(format!("{name}.labels")), cloud.labels().unwrap()).unwrap();
    }
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn segment_writes_report_and_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "blobs", 1, true);
    let out = dir.path().join("seg.json");
    let res = run(&["segment", "--method", "hgsp", "--k", "2", "--input", s(&input), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out);
    assert_eq!(report["assignments"].as_array().unwrap().len(), 60);
    assert!(report["E"].as_u64().unwrap() >= 1);
    assert_eq!(report["method"], "hgsp");
    assert_eq!(report["metrics"]["accuracy"], 1.0);
    assert!(report["metrics"]["eigencurve"].as_array().unwrap().len() == 60);
    assert_eq!(report["config"]["beta"], 1.0);
    assert!(report["version"].is_string());
    let lines = std::fs::read_to_string(dir.path().join("seg.assignments.txt")).unwrap();
    assert_eq!(lines.lines().count(), 60);
}

#[test]
fn every_method_segments() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "blobs", 2, true);
    for method in ["hgsp", "gsp", "laplacian", "kmeans"] {
        let out = dir.path().join(format!("{method}.json"));
        let res = run(&["segment", "--method", method, "--k", "2", "--input", s(&input), "--out", s(&out), "--t", "900"]);
        assert!(res.status.success(), "{method}: {}", String::from_utf8_lossy(&res.stderr));
        assert_eq!(read_json(&out)["method"], method);
    }
}

#[test]
fn argument_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "blobs", 3, false);
    let out = dir.path().join("x.json");
    let unknown = run(&["segment", "--method", "spectral", "--k", "2", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(unknown.status.code(), Some(2));
    let zero_k = run(&["segment", "--k", "0", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(zero_k.status.code(), Some(2));
    let threads = bin()
        .env("HYPERSEG_THREADS", "many")
        .args(["segment", "--k", "2", "--input", s(&input), "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn module_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let missing = run(&["segment", "--k", "2", "--input", s(&dir.path().join("none.xyz")), "--out", s(&out)]);
    assert_eq!(missing.status.code(), Some(1));
    let input = fixture(dir.path(), "blobs", 4, false);
    let too_many = run(&["segment", "--k", "500", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(too_many.status.code(), Some(1));
}

fn strip_runtime(mut v: Value) -> Value {
    v["metrics"].as_object_mut().unwrap().remove("runtime_seconds");
    v.as_object_mut().unwrap().remove("timing_samples");
    v
}

#[test]
fn noisy_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "blobs", 5, true);
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let res = bin()
            .env("HYPERSEG_THREADS", "1")
            .args(["segment", "--k", "2", "--snr-db", "25", "--seed", "7", "--input", s(&input), "--out", s(&out)])
            .output()
            .unwrap();
        assert!(res.status.success());
        reports.push(strip_runtime(read_json(&out)));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0]["config"]["snr_db"], 25.0);
    assert_eq!(reports[0]["config"]["seed"], 7);
}

#[test]
fn spectrum_emits_curves_per_sample_size() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "blobs", 6, false);
    let out = dir.path().join("curves");
    let res = run(&["spectrum", "--method", "hgsp,gsp", "--samples", "20,50", "--input", s(&input), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for (method, n) in [("hgsp", 20), ("hgsp", 50), ("gsp", 20), ("gsp", 50)] {
        let text = std::fs::read_to_string(out.join(format!("{method}_{n}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("pos,value"));
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), n);
        assert_eq!(rows[0].1, 1.0);
        if method == "hgsp" {
            assert!(rows.iter().filter(|r| r.1 != 0.0).count() <= 3);
        }
    }
    let summary = read_json(&out.join("spectrum.json"));
    let curves = summary["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 4);
    assert!(curves.iter().any(|c| c["method"] == "hgsp" && c["spectrum"]["sigma"].is_array()));
}

#[test]
fn benchmark_reports_rows_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    fixture(&data, "a", 7, true);
    fixture(&data, "b", 8, false);
    std::fs::write(data.join("broken.xyz"), "1 2\n").unwrap();
    let out = dir.path().join("bench.json");
    let res = run(&["benchmark", "--input", s(&data), "--k", "2", "--t", "900", "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let labelled = row["cloud"] == "a.xyz";
        assert_eq!(row.get("accuracy").is_some(), labelled, "{row}");
    }
    assert_eq!(report["aggregate"].as_object().unwrap().len(), 4);
    assert_eq!(report["skipped"].as_array().unwrap().len(), 1);
    for key in ["beta", "delta", "t", "seed", "sub_seeds"] {
        assert!(report["config"].get(key).is_some(), "{key}");
    }
}

#[test]
fn benchmark_fails_when_nothing_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.xyz"), "not a cloud\n").unwrap();
    let out = dir.path().join("bench.json");
    let res = run(&["benchmark", "--input", s(dir.path()), "--k", "2", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
}
