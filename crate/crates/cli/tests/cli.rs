use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blaschke"))
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str], cfg: &Path) -> Output {
    bin().args(args).arg(cfg).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn conjugate_pair() -> Value {
    json!({ "family": "deg2_conjugate", "params": { "w": { "a": "2", "b": "1", "d": -1 } } })
}

fn half() -> Value {
    json!({ "zeros": [{ "re": 0.5, "im": 0.0 }] })
}

#[test]
fn analyze_orders() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "a.json", &json!({ "example": conjugate_pair() }));
    let v: Value = serde_json::from_str(&stdout(&run(&["analyze"], &cfg))).unwrap();
    assert_eq!(v["N"], 5);

    let cfg = write(&dir, "b.json", &json!({ "product": half() }));
    let v: Value = serde_json::from_str(&stdout(&run(&["analyze"], &cfg))).unwrap();
    assert_eq!(v["N"], 3);
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
}

#[test]
fn empty_product_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "e.json", &json!({ "product": { "zeros": [] } }));
    let o = run(&["analyze"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: InvalidProduct"));
}

#[test]
fn scan_json_slope() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        &json!({ "product": half(), "n_list": [1024, 2048, 4096, 8192, 16384] }),
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["scan", "--format", "json"], &cfg))).unwrap();
    let slope = v["fit_sup"]["slope"].as_f64().unwrap();
    assert!((-0.363..=-0.303).contains(&slope), "{slope}");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn predict_at_peak() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.json", &json!({ "example": conjugate_pair(), "n_list": [16384] }));
    let out = stdout(&run(&["predict"], &cfg));
    let mut lines = out.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let row: Vec<_> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("N"), "5");
    let rel: f64 = col("rel_err").parse().unwrap();
    assert!(rel < 0.15, "{rel}");
}

#[test]
fn schaffer_ratio_growth() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "r.json",
        &json!({ "product": half(), "n_list": [256, 512, 1024, 2048, 4096] }),
    );
    let out = stdout(&run(&["schaffer", "--format", "json"], &cfg));
    let rows: Vec<Value> = serde_json::from_str(&out).unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let n = r["n"].as_f64().unwrap();
            (n.ln(), r["schaffer_ratio"].as_f64().unwrap().ln())
        })
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((0.283..=0.383).contains(&slope), "{slope}");
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "d.json", &json!({ "example": conjugate_pair(), "n_list": [512, 1024] }));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = bin().args(["scan", "--output"]).arg(p).arg(&cfg).output().unwrap();
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never.csv");
    for (name, v) in [
        ("unknown.json", json!({ "product": half(), "n_list": [8], "bogus": 1 })),
        ("order.json", json!({ "product": half(), "n_list": [64, 32] })),
        ("eps.json", json!({ "product": half(), "n_list": [64], "eps": 0.5 })),
        ("cmd.json", json!({ "command": "analyze", "product": half(), "n_list": [64] })),
    ] {
        let cfg = write(&dir, name, &v);
        let o = bin().args(["scan", "--output"]).arg(&out).arg(&cfg).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!out.exists(), "{name}");
    }
}

#[test]
fn sample_cap_is_a_budget_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never.csv");
    let cfg = write(
        &dir,
        "c.json",
        &json!({ "product": half(), "n_list": [64, 1 << 20], "sample_cap": 4096 }),
    );
    let o = bin().args(["scan", "--output"]).arg(&out).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("BudgetExceeded"));
    assert!(!out.exists());
}

#[test]
fn huge_tolerance_is_numerical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.json", &json!({ "product": half(), "tol": 10.0 }));
    let o = run(&["analyze"], &cfg);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn family_subcommands() {
    let o = bin().args(["example", "deg4"]).output().unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["expected_N"], 7);
    assert_eq!(v["product"].as_array().unwrap().len(), 4);

    let dir = TempDir::new().unwrap();
    let p = write(&dir, "g.json", &json!({ "N": 3 }));
    let o = bin().args(["example", "general-n"]).arg(&p).output().unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["expected_N"], 3);

    let spec = write(&dir, "spec.json", &conjugate_pair());
    let v: Value = serde_json::from_str(&stdout(&run(&["example"], &spec))).unwrap();
    assert_eq!(v["expected_N"], 5);
}

#[test]
fn csv_round_trips_floats() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "j.json", &json!({ "product": half(), "n_list": [300, 700] }));
    let csv = stdout(&run(&["scan"], &cfg));
    let js: Value = serde_json::from_str(&stdout(&run(&["scan", "--format", "json"], &cfg))).unwrap();
    for (line, row) in csv.lines().skip(1).zip(js["rows"].as_array().unwrap()) {
        let f: Vec<&str> = line.split(',').collect();
        for (i, key) in [(1, "sup"), (3, "l1"), (4, "l2")] {
            let parsed: f64 = f[i].parse().unwrap();
            assert_eq!(parsed.to_bits(), row[key].as_f64().unwrap().to_bits(), "{key}");
        }
    }
}
