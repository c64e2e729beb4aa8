use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spcirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spcirc")).args(args).output().expect("binary runs")
}

fn envelope(args: &[&str]) -> Value {
    let out = spcirc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_gp_config(dir: &Path) -> String {
    let p = dir.join("gp.json");
    fs::write(&p, r#"{"schema_version":1,"n":3,"states":["basis:0","basis:4","pair:1,2"],"observable":"IYI","samples":100}"#)
        .unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn closure_theorem1_three_qubits() {
    let v = envelope(&["closure", "--set", "theorem1", "--n", "3"]);
    assert_eq!(v["payload"]["dimension"], 36);
    assert_eq!(v["payload"]["classification"], "sp");
    assert_eq!(v["command"], "closure");
    assert!(v["build_id"].as_str().unwrap().starts_with("0.1.0-"));
}

#[test]
fn closure_custom_generators_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gens.txt");
    fs::write(&p, "# su(2) on one qubit\nX\nZ\n").unwrap();
    let v = envelope(&["closure", "--set", "custom", "--n", "1", "--generators", p.to_str().unwrap()]);
    assert_eq!(v["payload"]["dimension"], 3);
}

#[test]
fn gram_sp_t2_d4() {
    let v = envelope(&["gram", "--t", "2", "--d", "4", "--group", "sp"]);
    let m: Vec<Vec<f64>> = serde_json::from_value(v["payload"]["matrix"].clone()).unwrap();
    let (a, b) = (16.0, 4.0);
    let diagrams: Vec<String> = serde_json::from_value(v["payload"]["diagrams"].clone()).unwrap();
    assert_eq!(diagrams.len(), 3);
    for (i, row) in m.iter().enumerate() {
        assert!((row[i] - a).abs() < 1e-12);
        for (j, x) in row.iter().enumerate() {
            if i != j {
                assert!((x.abs() - b).abs() < 1e-12, "entry {i},{j} = {x}");
            }
        }
    }
}

#[test]
fn collision_two_qubits_one_layer() {
    let v = envelope(&["collision", "--n", "2", "--layers", "1"]);
    let z = v["payload"]["z"].as_f64().unwrap();
    assert!((z - 0.4).abs() < 1e-12);
}

#[test]
fn gp_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_gp_config(dir.path());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    envelope(&["gp", "--config", &cfg, "--seed", "11", "--out", a.to_str().unwrap()]);
    envelope(&["--threads", "1", "gp", "--config", &cfg, "--seed", "11", "--out", b.to_str().unwrap()]);
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample_id,state_id,value"));
    assert_eq!(lines.count(), 300);
}

#[test]
fn envelope_replays() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.json");
    let first = envelope(&["--envelope", env.to_str().unwrap(), "anticoncentration", "--n", "3", "--samples", "200", "--seed", "5"]);
    let again = envelope(&["run", "--config", env.to_str().unwrap()]);
    assert_eq!(first["config"], again["config"]);
    assert_eq!(first["payload"], again["payload"]);
}

#[test]
fn sample_then_twirl() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.bin");
    let v = envelope(&["sample", "--group", "o", "--d", "9", "--count", "2", "--seed", "3", "--out", m.to_str().unwrap()]);
    assert!(v["payload"]["max_unitarity_defect"].as_f64().unwrap() < 1e-10);
    // A 9x9 matrix is a valid t = 2 input for d = 3.
    let v = envelope(&["twirl", "--t", "2", "--d", "3", "--group", "o", "--input", m.to_str().unwrap()]);
    assert_eq!(v["payload"]["coefficients"].as_object().unwrap().len(), 3);
}

#[test]
fn simulate_writes_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let out = dir.path().join("psi.csv");
    fs::write(&c, r#"{"n":1,"gates":[{"type":"rot","pauli":"X","theta":0.7853981633974483}]}"#).unwrap();
    let o = spcirc(&["simulate", "--circuit", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "index,re,im,probability");
    let p0: f64 = rows[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((p0 - 0.5).abs() < 1e-12);
}

#[test]
fn dry_run_does_not_write() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.bin");
    let v = envelope(&["--dry-run", "sample", "--group", "sp", "--d", "8", "--count", "4", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(v["dry_run"], true);
    assert_eq!(v["payload"]["valid"], true);
    assert!(!out.exists());
}

#[test]
fn missing_seed_is_a_usage_error() {
    let o = spcirc(&["anticoncentration", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"schema_version":1,"command":{"name":"collision","params":{"n":4,"layers":3,"depth":2}}}"#).unwrap();
    let o = spcirc(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth"));
}

#[test]
fn exit_codes() {
    assert_eq!(spcirc(&["--help"]).status.code(), Some(0));
    assert_eq!(spcirc(&["--version"]).status.code(), Some(0));
    assert_eq!(spcirc(&["collision", "--n", "17", "--layers", "1"]).status.code(), Some(2));
    assert_eq!(spcirc(&["sample", "--group", "sp", "--d", "3", "--count", "1", "--seed", "0", "--out", "/dev/null"]).status.code(), Some(1));
    assert_eq!(spcirc(&["closure", "--set", "prop2", "--n", "1"]).status.code(), Some(1));
}
