/*
Copyright 2026 The vmpladmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vmpladmm"))
}

fn write_config(dir: &Path, name: &str, body: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(body).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn toy(out: &Path, solver: Value) -> Value {
    json!({
        "problem": { "generator": "consensus_toy", "target": [1.0, -0.5] },
        "solver": solver,
        "output_dir": out,
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn consensus_run_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "c.json", &toy(&out, json!({ "alpha": 4.0, "beta": 1.0, "q2": 1.0 })));
    let o = run(&["run", path_str(&cfg), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let member = out.join("beta_1");
    assert!(member.join("trace.csv").exists());
    let summary: Value = serde_json::from_reader(std::fs::File::open(member.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["total_violations"], 0);
}

#[test]
fn beta_sweep_writes_one_trace_per_member() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = write_config(
        dir.path(),
        "s.json",
        &toy(&out, json!({ "alpha": 1.0, "auto_alpha": true, "betas": [0.5, 1.0, 1.5], "q2": 10.0 })),
    );
    let o = run(&["run", path_str(&cfg), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for b in ["beta_0.5", "beta_1", "beta_1.5"] {
        assert!(out.join(b).join("trace.csv").exists(), "{b}");
    }
}

#[test]
fn bad_inputs_exit_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let guard = write_config(dir.path(), "g.json", &toy(&out, json!({ "beta": 1.99 })));
    let o = run(&["run", path_str(&guard)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));

    let unknown = write_config(dir.path(), "u.json", &toy(&out, json!({ "alpah": 2.0 })));
    assert_eq!(run(&["run", path_str(&unknown)]).status.code(), Some(1));

    let broken = dir.path().join("b.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["run", path_str(&broken)]).status.code(), Some(1));
    assert_eq!(run(&["run", path_str(&dir.path().join("missing.json"))]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn audit_reports_failure_and_a_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let small = write_config(
        dir.path(),
        "a.json",
        &json!({
            "problem": { "generator": "consensus_toy", "target": [1.0] },
            "solver": { "alpha": 1.0, "beta": 1.0, "schedule": { "kind": "fixed-scaled-identity", "q1": 2.0, "q2": 1.0 } },
            "output_dir": out,
        }),
    );
    let o = run(&["audit", path_str(&small)]);
    assert_eq!(o.status.code(), Some(3));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("audit: fail"), "{text}");
    assert!(text.contains("suggested alpha: 4"), "{text}");

    let good = write_config(dir.path(), "b.json", &toy(&out, json!({ "alpha": 4.0, "beta": 1.0, "q2": 1.0 })));
    let o = run(&["audit", path_str(&good)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("audit: pass"));
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let body = |out: PathBuf| {
        json!({
            "problem": {
                "generator": "sparse_regression", "n": 15, "m_rows": 20, "sparsity": 3,
                "noise_sigma": 0.01, "penalty": "l_half", "lambda": 0.05, "seed": 4
            },
            "solver": { "alpha": 1.0, "auto_alpha": true, "betas": [0.8, 1.2], "q2": 10.0, "max_iter": 2000 },
            "output_dir": out,
            "deterministic": true
        })
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ca = write_config(dir.path(), "a.json", &body(a.clone()));
    let cb = write_config(dir.path(), "b.json", &body(b.clone()));
    run(&["run", path_str(&ca), "--quiet"]);
    run(&["run", path_str(&cb), "--quiet"]);
    for m in ["beta_0.8", "beta_1.2"] {
        let ta = std::fs::read(a.join(m).join("trace.csv")).unwrap();
        let tb = std::fs::read(b.join(m).join("trace.csv")).unwrap();
        assert!(!ta.is_empty());
        assert_eq!(ta, tb, "{m}");
    }
}

#[test]
fn summary_counts_match_the_trace() {
    // strong over-relaxation with a small y-metric trips the decrease certificate
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "v.json",
        &json!({
            "problem": {
                "generator": "sparse_regression", "n": 20, "m_rows": 30, "sparsity": 5,
                "penalty": "l1", "lambda": { "fraction_of_max": 0.1 }, "seed": 2
            },
            "solver": { "alpha": 1.0, "auto_alpha": true, "beta": 1.5, "q1_per_alpha": 1.0, "q2": 1.0, "max_iter": 3000 },
            "output_dir": out,
        }),
    );
    let o = run(&["run", path_str(&cfg), "--quiet"]);
    assert_eq!(o.status.code(), Some(2));

    let member = out.join("beta_1.5");
    let summary: Value = serde_json::from_reader(std::fs::File::open(member.join("summary.json")).unwrap()).unwrap();
    let mut reader = csv::Reader::from_path(member.join("trace.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let mut counted: BTreeMap<String, u64> = BTreeMap::new();
    for row in reader.records() {
        let row = row.unwrap();
        for (h, cell) in headers.iter().zip(row.iter()) {
            if cell == "fail" {
                *counted.entry(h.to_string()).or_default() += 1;
            }
        }
    }
    let reported: BTreeMap<String, u64> = summary["certificate_violations"]
        .as_object()
        .unwrap()
        .iter()
        .filter(|(_, n)| n.as_u64().unwrap() > 0)
        .map(|(k, n)| (k.clone(), n.as_u64().unwrap()))
        .collect();
    assert!(counted.get("sufficient_decrease").copied().unwrap_or(0) > 0);
    assert_eq!(counted, reported);
    assert_eq!(summary["total_violations"].as_u64().unwrap(), counted.values().sum::<u64>());
}
