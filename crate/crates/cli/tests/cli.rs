use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qfall(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfall"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn eotvos_terrestrial_rows() {
    let dir = TempDir::new().unwrap();
    let out = qfall(&["eotvos", "--g", "10", "--d2g", "1e-12", "--width", "1e-10,1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("eotvos.csv"));
    assert_eq!(header, ["g", "d2g", "dxx", "eta"]);
    let eta: Vec<f64> = rows.iter().map(|r| num(&r[3])).collect();
    assert!((eta[0] / 0.5e-33 - 1.0).abs() < 1e-12, "{eta:?}");
    assert!((eta[1] / 0.5e-13 - 1.0).abs() < 1e-12, "{eta:?}");
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["parameters"]["width"]["source"], "flag");
}

#[test]
fn reconstruct_order_two_is_the_gaussian() {
    let (x0, p0, dxx, dxp) = (0.3, 0.7, 0.5, 0.1);
    let dir = TempDir::new().unwrap();
    let out = qfall(
        &["reconstruct", "--order", "2", "--x-mean", "0.3", "--p-mean", "0.7", "--dxx", "0.5", "--dxp", "0.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("reconstruction.csv"));
    assert_eq!(header, ["x", "rho", "dtheta_dx", "theta"]);
    assert_eq!(rows.len(), 241);
    for r in &rows {
        let x = num(&r[0]);
        let rho = (-(x - x0) * (x - x0) / (2.0 * dxx)).exp() / (2.0 * std::f64::consts::PI * dxx).sqrt();
        let slope = p0 + dxp / dxx * (x - x0);
        assert!((num(&r[1]) - rho).abs() <= 1e-12 * rho.max(1e-300) + 1e-300, "rho at {x}");
        assert!((num(&r[2]) - slope).abs() < 1e-10, "phase slope at {x}");
    }
    let first = num(&rows[0][0]);
    let last = rows.last().unwrap();
    let x = num(&last[0]);
    let theta = p0 * (x - first) + 0.5 * dxp / dxx * ((x - x0).powi(2) - (first - x0).powi(2));
    assert!((num(&last[3]) - theta).abs() < 1e-9 * theta.abs().max(1.0));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["return-time", "--u", "1e-3", "--eps-grid", "-0.8:-0.3:6", "--seed", "7"];
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(qfall(&args, a.path()).status.success());
    assert!(qfall(&args, b.path()).status.success());
    for name in ["return_time.csv", "manifest.json"] {
        let (x, y) = (std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        assert_eq!(x, y, "{name} differs");
    }
    assert_eq!(manifest(a.path())["seed"], 7);
}

#[test]
fn return_time_always_includes_classical_curve() {
    let dir = TempDir::new().unwrap();
    let out = qfall(&["return-time", "--u", "1e-2", "--eps-grid", "-0.9:-0.5:3", "--svg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = csv(&dir.path().join("return_time.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows[..3].iter().all(|r| num(&r[1]) == 0.0 && r[3] == "ok"));
    // Point-particle Kepler return time at ε = −0.5 from r = 1: π + 2.
    let classical = num(&rows[2][2]);
    assert!((classical - (std::f64::consts::PI + 2.0)).abs() < 1e-8, "{classical}");
    let svg = std::fs::read_to_string(dir.path().join("return_time.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn csv_values_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = qfall(&["simulate", "--units", "nondimensional", "--samples", "9"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "x", "p", "s", "ps", "energy", "casimir"]);
    assert_eq!(rows.len(), 9);
    for cell in rows.iter().flatten() {
        let v: f64 = cell.parse().unwrap();
        assert_eq!(&format!("{v:.16e}"), cell);
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "command = eotvos\n# widths in metres\nwidth = 1e-3\ng = 9.81\n").unwrap();
    let out = qfall(&["eotvos", "--config", cfg.to_str().unwrap(), "--width", "2e-3"], dir.path());
    assert!(out.status.success());
    let m = manifest(dir.path());
    assert_eq!(m["parameters"]["width"]["source"], "flag");
    assert_eq!(m["parameters"]["width"]["value"][0], 2e-3);
    assert_eq!(m["parameters"]["g"]["source"], "config line 4");
}

#[test]
fn bad_config_exits_with_line_and_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "u = 1e-3\nescape_factor = fast\n").unwrap();
    let out = qfall(&["return-time", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, field 'escape-factor'"), "{err}");

    std::fs::write(&cfg, "command = eotvos\n").unwrap();
    let out = qfall(&["return-time", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = qfall(&["eotvos", "--width", "1e-3,x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field 'width'"));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn uncertainty_violation_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = qfall(&["reconstruct", "--dxx", "1", "--dpp", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_abort_keeps_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = qfall(
        &["simulate", "--units", "nondimensional", "--point", "true", "--p0", "0", "--t-end", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = csv(&dir.path().join("trajectory.csv"));
    assert!(rows.len() > 2);
    let last_t = num(&rows.last().unwrap()[0]);
    // Radial free fall from rest at r = 1 reaches the centre at t = π/(2√2).
    assert!((last_t - std::f64::consts::PI / 8f64.sqrt()).abs() < 1e-3, "{last_t}");
    let status = manifest(dir.path())["status"].as_str().unwrap().to_string();
    assert!(status.starts_with("numerical abort"), "{status}");
}

#[test]
fn interferometer_writes_one_row_per_setting() {
    let dir = TempDir::new().unwrap();
    let out = qfall(
        &["interferometer", "--units", "natural", "--t-pulse", "0.5,1", "--gradient", "0,-0.01", "--readout", "lower"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("mz_phase.csv"));
    assert_eq!(header, ["T", "k", "gradient", "separation", "dtheta"]);
    assert_eq!(rows.len(), 4);
    // A uniform field moves both arms alike and they close.
    assert!(num(&rows[0][3]).abs() < 1e-9 && num(&rows[1][3]).abs() < 1e-9);
    assert!(num(&rows[3][3]).abs() > 1e-6);
}
