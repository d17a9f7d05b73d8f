use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn nelson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nelson")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every regular file under `root`, keyed by relative path.
fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn missing_config_is_a_config_error() {
    let o = nelson(&["gravity", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.json"));
}

#[test]
fn unknown_override_and_verb_are_rejected() {
    let o = nelson(&["gravity", "--set", "sigma=0.3", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sigma"));
    assert_eq!(nelson(&["triple-slit"]).status.code(), Some(2));
    assert_eq!(nelson(&["oscillator", "--bogus"]).status.code(), Some(2));
}

#[test]
fn config_merges_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.json");
    std::fs::write(&cfg, r#"{"gravity": {"n": 1200, "grid": {"h": [2.5]}}, "double-slit": {"n": 5000}}"#).unwrap();
    let o = nelson(&["gravity", "--config", cfg.to_str().unwrap(), "--set", "zeta=0.1", "--seed", "42", "--dry-run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let spec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(spec["n"], 1200);
    assert_eq!(spec["master_seed"], 42);
    assert_eq!(spec["grid"]["h"], serde_json::json!([2.5]));
    assert_eq!(spec["grid"]["zeta"], serde_json::json!([0.1]));
    assert_eq!(spec["grid"]["p"].as_array().unwrap().len(), 4);

    std::fs::write(&cfg, r#"{"gravity": {"n": 1200, "typo": 1}}"#).unwrap();
    assert_eq!(nelson(&["gravity", "--config", cfg.to_str().unwrap(), "--dry-run"]).status.code(), Some(2));
}

#[test]
fn gravity_outputs_are_byte_identical_across_thread_counts() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let sets = ["h=2.5", "n=2500", "t_end=0.01", "dt=0.001", "observe_every=0.002"];
    for (d, threads) in dirs.iter().zip(["1", "3"]) {
        let mut args = vec!["gravity", "--seed", "42", "--threads", threads, "--out", d.path().to_str().unwrap()];
        for s in &sets {
            args.extend(["--set", s]);
        }
        let o = nelson(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (a, b) = (tree(dirs[0].path()), tree(dirs[1].path()));
    assert_eq!(a, b);

    let manifest: serde_json::Value = serde_json::from_slice(&a["manifest.json"]).unwrap();
    let files = manifest["files"].as_object().unwrap();
    assert_eq!(files.len() + 1, a.len());
    for (path, entry) in files {
        assert_eq!(entry["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&a[path])), "{path}");
    }
    let csv = String::from_utf8(a["gravity/h=2.5/series_H.csv"].clone()).unwrap();
    assert!(csv.starts_with("t,value\n"));
    let svg = String::from_utf8(a["gravity/h=2.5/H.svg"].clone()).unwrap();
    assert!(svg.contains("master_seed=42") && svg.contains("<polyline"));
    let report: serde_json::Value = serde_json::from_slice(&a["report.json"]).unwrap();
    assert_eq!(report["provenance"]["master_seed"], 42);
    assert_eq!(report["records"][0]["params"]["h"], 2.5);
}
