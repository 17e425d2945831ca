//! End-to-end runs of the `cdde` binary: configs in, CSV/JSON out, with the
//! documented exit codes and byte-reproducible artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn cdde() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cdde"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cdde-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv_body(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash_line = lines.next().unwrap();
    assert!(hash_line.starts_with("# config_hash "), "hash comment: {hash_line}");
    let _header = lines.next().unwrap();
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn selftest_passes() {
    let status = cdde().arg("selftest").status().unwrap();
    assert!(status.success());
}

#[test]
fn unknown_flags_exit_with_usage() {
    let out = cdde().arg("solve").arg("--bogus-flag").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_config_is_a_validation_error() {
    let out = cdde().arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = temp_dir("badcfg");
    let cfg = write_config(&dir, "bad.json", r#"{"field": 3}"#);
    let out = cdde()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_pure_delay_trajectory() {
    let dir = temp_dir("solve");
    let cfg = write_config(
        &dir,
        "ex_u.json",
        r#"{
            "field": {"dim": 1, "expr": {"var": "u"}},
            "phi": {"constant": {"value": [1.0]}},
            "horizon": 2.0,
            "step": 0.001
        }"#,
    );
    let out_dir = dir.join("out");
    let status = cdde()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let rows = read_csv_body(&out_dir.join("trajectory.csv"));
    let at = |t: f64| -> f64 {
        rows.iter()
            .min_by(|a, b| {
                let da = (a[0].parse::<f64>().unwrap() - t).abs();
                let db = (b[0].parse::<f64>().unwrap() - t).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()[1]
            .parse()
            .unwrap()
    };
    assert!((at(1.0) - 2.0).abs() < 1e-3, "x(1) = {}", at(1.0));
    assert!((at(2.0) - 3.5).abs() < 1e-3, "x(2) = {}", at(2.0));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("solve_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["blow_up"], serde_json::Value::Bool(false));
    assert!(report["config_hash"].as_str().unwrap().len() == 64);
    assert!(out_dir.join("provenance.json").exists());
}

#[test]
fn seminorms_of_zero_field_are_zero() {
    let dir = temp_dir("zero");
    let cfg = write_config(
        &dir,
        "zero.json",
        r#"{
            "field": {"dim": 1, "expr": {"const": 0.0}},
            "indices": [
                {"kind": "TB", "interval": [0, 1], "j": 1},
                {"kind": "TTheta", "interval": [0, 1], "j": 1},
                {"kind": "sigmaTheta", "interval": [0, 1], "j": 1},
                {"kind": "TThetaB", "interval": [0, 1], "j": 1},
                {"kind": "TD", "interval": [0, 1], "j": 1, "point": [0.5, 0.5]}
            ],
            "theta": {"uniform": {"modulus": {"linear": {"c": 1.0}}}},
            "resolution": {"time_step": 0.03125, "lattice_step": 0.5, "direction_count": 4}
        }"#,
    );
    let out_dir = dir.join("out");
    let status = cdde()
        .arg("seminorm")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv_body(&out_dir.join("seminorms.csv"));
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0, "row {row:?}");
    }
    // argmax path files referenced and present
    assert!(out_dir.join(&rows[0][6]).exists());
}

#[test]
fn distance_of_field_to_itself_is_zero_and_runs_are_byte_identical() {
    let dir = temp_dir("dist");
    let cfg = write_config(
        &dir,
        "dist.json",
        r#"{
            "field_a": {"dim": 1, "expr": {"op":"mul","args":[{"op":"sin","args":[{"var":"t"}]},{"var":"x"}]}},
            "field_b": {"dim": 1, "expr": {"op":"mul","args":[{"op":"sin","args":[{"var":"t"}]},{"var":"x"}]}},
            "kind": "TTheta",
            "k_max": 2,
            "theta": {"uniform": {"modulus": {"linear": {"c": 1.0}}}},
            "resolution": {"time_step": 0.03125, "lattice_step": 0.5, "direction_count": 4}
        }"#,
    );
    let run = |out: &Path| {
        let status = cdde()
            .arg("distance")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    run(&out1);
    run(&out2);
    let d: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("distance.json")).unwrap()).unwrap();
    assert_eq!(d["value"], serde_json::json!(0.0));
    // identical config => byte-identical artifacts (provenance excluded)
    let a = fs::read(out1.join("distance.json")).unwrap();
    let b = fs::read(out2.join("distance.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bounds_of_constant_field() {
    let dir = temp_dir("bounds");
    let cfg = write_config(
        &dir,
        "bounds.json",
        r#"{
            "field": {"dim": 1, "expr": {"const": 3.0}},
            "kinds": ["m", "l"],
            "j_list": [1],
            "interval": [0, 1],
            "spatial_step": 0.5,
            "time_step": 0.25
        }"#,
    );
    let out_dir = dir.join("out");
    let status = cdde()
        .arg("bounds")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv_body(&out_dir.join("bounds.csv"));
    for row in &rows {
        let value: f64 = row[3].parse().unwrap();
        match row[0].as_str() {
            "m" => assert_eq!(value, 3.0),
            "l" => assert_eq!(value, 0.0),
            other => panic!("unexpected kind {other}"),
        }
    }
}

#[test]
fn experiment_bound_propagation_runs() {
    let dir = temp_dir("exp");
    let out_dir = dir.join("out");
    let status = cdde()
        .arg("experiment")
        .arg("--scenario")
        .arg("bound_propagation")
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["type"], "propagation");
    assert_eq!(report["holds"], serde_json::Value::Bool(true));
    assert!(out_dir.join("decay.csv").exists());
}

#[test]
fn experiment_rejects_unknown_scenario() {
    let out = cdde()
        .arg("experiment")
        .arg("--scenario")
        .arg("nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hull_of_autonomous_field_is_degenerate() {
    let dir = temp_dir("hull");
    let cfg = write_config(
        &dir,
        "hull.json",
        r#"{
            "field": {"dim": 1, "expr": {"op":"add","args":[{"var":"x"},{"var":"u"}]}},
            "times": [0.0, 0.5, 1.0],
            "kind": "TTheta",
            "k_max": 2,
            "theta": {"uniform": {"modulus": {"linear": {"c": 1.0}}}},
            "resolution": {"time_step": 0.03125, "lattice_step": 0.5, "direction_count": 4}
        }"#,
    );
    let out_dir = dir.join("out");
    let status = cdde()
        .arg("hull")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let hull: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("hull.json")).unwrap()).unwrap();
    for row in hull["distances"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
    }
}
