use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isomono_core::algebra::orbit_sample;
use isomono_core::wstructures::{expected_pole_coefficients, random_w_sample, WSampleSpec};
use isomono_core::{FuchsianConnection, OrbitPoint, C64};
use serde_json::{json, Value};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn isomono(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isomono")).args(args).output().expect("binary runs")
}

fn run(command: &str, config: &Path, out: &Path) -> Output {
    isomono(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Three points, `N = 2`, residues from seeded orbit samples with `p3 = -p1 - p2`.
fn fixture_connection() -> FuchsianConnection {
    let p1 = orbit_sample(&[c(0.4, 0.0), c(-0.4, 0.0)], 101).unwrap();
    let p2 = orbit_sample(&[c(0.25, 0.1), c(-0.25, -0.1)], 102).unwrap();
    let p3 = OrbitPoint::new(-(&p1.p + &p2.p)).unwrap();
    let points = vec![c(0.0, 0.0), c(1.5, 0.0), c(-0.5, 1.5)];
    FuchsianConnection::new(c(1.0, 0.0), points, vec![p1, p2, p3], true).unwrap()
}

fn generated() -> Vec<(&'static str, Value)> {
    let conn = fixture_connection();
    let kappa = c(1.0, 0.0);
    let poles: Vec<Value> = conn
        .residues()
        .iter()
        .map(|r| {
            json!({
                "residue": r.p,
                "declared": expected_pole_coefficients(&r.p, kappa, 3).unwrap(),
            })
        })
        .collect();
    let explicit = random_w_sample(&WSampleSpec::new(3, Some(2)), 5).unwrap();
    vec![
        (
            "schlesinger_n3.json",
            json!({
                "command": "schlesinger-audit",
                "connection": conn,
                "flow": {"direction": 0, "t_end": [0.3, 0.0]},
            }),
        ),
        (
            "gaudin_n3.json",
            json!({
                "command": "gaudin-run",
                "seed": 11,
                "random": {"points": 3, "dim": 2},
                "flow": {"direction": 1, "t_end": [1.0, 0.0]},
            }),
        ),
        (
            "monodromy_n3.json",
            json!({"command": "monodromy", "connection": conn}),
        ),
        (
            "spectral_curve_n3.json",
            json!({"command": "spectral-curve", "seed": 3, "connection": conn}),
        ),
        (
            "wcheck_k3.json",
            json!({
                "command": "wcheck",
                "seed": 2024,
                "wcheck": {
                    "samples": 100,
                    "dims": [2, 3],
                    "maps": 20,
                    "samples_explicit": [explicit],
                    "poles": {"kappa": [1.0, 0.0], "level": 3, "points": poles},
                },
            }),
        ),
    ]
}

/// Set `ISOMONO_WRITE_FIXTURES=1` to rewrite the bundled configs.
#[test]
fn bundled_fixtures_match_their_generator() {
    let write = std::env::var_os("ISOMONO_WRITE_FIXTURES").is_some();
    for (name, value) in generated() {
        let path = fixtures().join(name);
        let text = serde_json::to_string_pretty(&value).unwrap() + "\n";
        if write {
            std::fs::create_dir_all(fixtures()).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
        assert_eq!(on_disk, text, "{name} is stale");
    }
}

#[test]
fn fixture_residues_sum_to_zero() {
    let conn = fixture_connection();
    assert!(conn.residue_sum().norm() < 1e-15);
    assert!(conn.residues().iter().all(|r| r.p.norm() <= 1.0));
}

#[test]
fn schlesinger_fixture_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = run("schlesinger-audit", &fixtures().join("schlesinger_n3.json"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(out.path().join("schlesinger-audit.json")).unwrap()).unwrap();
    assert!(report["invariant_drift"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["pass"], Value::Bool(true));
    let csv = std::fs::read_to_string(out.path().join("schlesinger-audit.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t_re,t_im,"), "{header}");
    assert!(header.ends_with("eig_drift_p1,eig_drift_p2,eig_drift_p3"), "{header}");
}

#[test]
fn wcheck_fixture_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = run("wcheck", &fixtures().join("wcheck_k3.json"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&std::fs::read(out.path().join("wcheck.json")).unwrap()).unwrap();
    let sweep = &report["sweep"];
    assert!(sweep["w3n_rows12"].as_f64().unwrap() < 1e-11);
    assert_eq!(sweep["samples"], json!(400));
    assert!(report["explicit"][0]["structural_rows"].as_f64().unwrap() < 1e-11);
}

#[test]
fn remaining_fixtures_pass() {
    for (command, file) in [
        ("gaudin-run", "gaudin_n3.json"),
        ("monodromy", "monodromy_n3.json"),
        ("spectral-curve", "spectral_curve_n3.json"),
    ] {
        let out = tempfile::tempdir().unwrap();
        let o = run(command, &fixtures().join(file), out.path());
        assert_eq!(
            o.status.code(),
            Some(0),
            "{command}: {}{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

#[test]
fn missing_kappa_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("monodromy_n3.json")).unwrap()).unwrap();
    cfg["connection"].as_object_mut().unwrap().remove("kappa");
    let o = run("monodromy", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("connection") && err.contains("kappa"), "{err}");
}

#[test]
fn command_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("gaudin-run", &fixtures().join("monodromy_n3.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_of_range_direction_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("schlesinger_n3.json")).unwrap()).unwrap();
    cfg["flow"]["direction"] = json!(3);
    let o = run("schlesinger-audit", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tight_threshold_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("monodromy_n3.json")).unwrap()).unwrap();
    cfg["thresholds"] = json!({"product_defect": 1e-30});
    let o = run("monodromy", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("monodromy.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], Value::Bool(false));
}

#[test]
fn step_budget_exhaustion_is_a_numerical_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("schlesinger_n3.json")).unwrap()).unwrap();
    cfg["integrator"] = json!({"max_steps": 1, "ode_tol": 1e-13});
    let o = run("schlesinger-audit", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("schlesinger-audit.json")).unwrap()).unwrap();
    assert!(report["error"]["kind"].is_string());
}

#[test]
fn command_line_seed_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("gaudin_n3.json");
    let o = isomono(&["gaudin-run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("gaudin-run.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], json!(12));
}

#[test]
fn ode_tol_outside_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("gaudin_n3.json");
    let o = isomono(&["gaudin-run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--ode-tol", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
