use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use vext_core::suite::{replay, Witness};

fn vext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HADAMARD: &str = r#"{"matrix":[[1,1],[1,-1]],
    "source":{"kind":"lp","p":2,"weights":[1,1]},
    "target":{"kind":"lp","p":2,"weights":[1,1]}}"#;

#[test]
fn verify_all_full_run_passes() {
    let o = vext(&["verify", "all", "--seed", "42", "--trials", "10000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_stdout(&o);
    assert_eq!(r["pass"], true);
    assert_eq!(r["seed"], 42);
    let checks = r["checks"].as_array().unwrap();
    for suite in ["extension", "sqfn", "condexp", "counterexample", "norms"] {
        assert!(checks.iter().any(|c| c["suite"] == suite), "missing suite {suite}");
    }
    for c in checks {
        for key in ["suite", "check", "instances", "max_residual", "bound", "pass"] {
            assert!(c.get(key).is_some(), "check lacks {key}: {c}");
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = vext(&["verify", "all", "--seed", "9", "--trials", "300", "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    vext(&["verify", "all", "--seed", "10", "--trials", "300", "--out", s(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let dir = TempDir::new().unwrap();
    for (text, key) in [
        (r#"{"trails": 5}"#, "trails"),
        (r#"{"trials": "many"}"#, "trials"),
        (r#"{"suites": ["extension", "bogus"]}"#, "suites"),
        (r#"{"corruption": {"delta": "big"}}"#, "corruption.delta"),
    ] {
        let p = write(&dir, "bad.json", text);
        let o = vext(&["verify", "all", "--config", s(&p)]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "diagnostic for {text} does not name `{key}`: {err}");
    }
    let p = write(&dir, "broken.json", r#"{"seed": 1,"#);
    assert_eq!(vext(&["verify", "all", "--config", s(&p)]).status.code(), Some(2));
    let p = write(&dir, "zero.json", r#"{"trials": 0}"#);
    let o = vext(&["verify", "all", "--config", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
    assert_eq!(vext(&["verify", "all", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(vext(&["verify", "all", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn corrupted_fixture_exits_1_with_replayable_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"seed": 5, "trials": 200, "suites": ["extension"], "corruption": {"delta": 1e-3}}"#);
    let out = dir.path().join("report.json");
    let o = vext(&["verify", "all", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness"));
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r["pass"], false);
    let failing: Vec<&Value> = r["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["check"], "relation");
    // the serialized witness reproduces the violation on its own
    let w: Witness = serde_json::from_value(failing[0]["witness"].clone()).unwrap();
    let residual = replay(&w).unwrap();
    assert!(residual > 1e-10);
    assert!((residual - failing[0]["max_residual"].as_f64().unwrap()).abs() < 1e-15);
    match w {
        Witness::Relation { atom, corrupted, .. } => assert_eq!(corrupted.unwrap()[0], atom),
        other => panic!("unexpected witness {other:?}"),
    }
}

#[test]
fn extension_scenario() {
    let dir = TempDir::new().unwrap();
    let sc = format!(r#"{{"operator": {HADAMARD}, "y": {{"p": 1, "dim": 2}}, "trials": 500, "seed": 3}}"#);
    let p = write(&dir, "sc.json", &sc);
    let o = vext(&["verify", "extension", "--config", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_stdout(&o);
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-10);
    assert!((r["m_norm"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let ratio = r["max_ratio"].as_f64().unwrap();
    assert!(ratio <= 2.0 + 1e-8 && ratio > 2f64.sqrt() + 0.05, "ratio {ratio}");
    assert_eq!(r["pass"], true);

    let bad = format!(r#"{{"operator": {HADAMARD}, "y": {{"p": 1, "dim": 2}}, "trials": 50, "corruption": {{"delta": 1e-3, "atom": 1, "coordinate": 0}}}}"#);
    let p = write(&dir, "bad.json", &bad);
    let o = vext(&["verify", "extension", "--config", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let r = json_stdout(&o);
    assert_eq!(r["witness"]["kind"], "relation");
    assert_eq!(r["witness"]["atom"], 1);

    let missing = format!(r#"{{"operator": {HADAMARD}}}"#);
    let p = write(&dir, "missing.json", &missing);
    assert_eq!(vext(&["verify", "extension", "--config", s(&p)]).status.code(), Some(2));
}

#[test]
fn sqfn_summary() {
    let o = vext(&["verify", "sqfn", "--trials", "300", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    let k = r["max_krivine_ratio"].as_f64().unwrap();
    assert!((1.0..=1.782215).contains(&k));
    assert!(r["max_mz_defect"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["pass"], true);
}

#[test]
fn condexp_scenario_and_csv() {
    let dir = TempDir::new().unwrap();
    let sc = r#"{"weights": [0.5, 1, 2, 0.25, 1.5], "blocks": [[0, 3], [1, 2, 4]],
                 "y": {"p": 3, "dim": 2}, "p": [1, 1.5, "inf"], "trials": 100, "seed": 2}"#;
    let p = write(&dir, "ce.json", sc);
    let o = vext(&["condexp", "--config", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_stdout(&o);
    assert_eq!(r["pass"], true);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"averaging_identity") && names.contains(&"tower"));

    let o = vext(&["verify", "condexp", "--config", s(&p), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("check,max_residual,bound,pass,auxiliary\n"));
    assert_eq!(text.lines().count(), 7);

    let bad = write(&dir, "bad.json", r#"{"weights": [1, 1], "blocks": [[0]], "y": {"p": 2, "dim": 1}}"#);
    assert_eq!(vext(&["condexp", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn counterexample_outputs() {
    let o = vext(&["counterexample", "--space", "c0", "--N", "10000", "--K", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert!((r["min_head"].as_f64().unwrap() - 0.99).abs() < 1e-12);
    assert_eq!(r["values"].as_array().unwrap().len(), 101);

    let o = vext(&["counterexample", "--space", "l1", "--N", "10000", "--K", "100", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("window,head,head_mass,total_pairing,gap"));
    let gap: f64 = lines.next().unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((gap - 0.99).abs() < 1e-12);

    let o = vext(&["counterexample", "--space", "c0", "--N", "5", "--K", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norms_scenario_and_suite() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "op.json", &format!(r#"{{"operator": {HADAMARD}}}"#));
    let o = vext(&["norms", "--config", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert!((r["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(r["exact"], true);
    assert!((r["m_norm"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let o = vext(&["norms", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["suite"] == "norms"));
}
