//! The `cmv` binary end to end: exit codes, artifacts, overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cmv(dir: &Path, args: &[&str], env_out: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cmv"));
    cmd.current_dir(dir).args(args).env_remove("CMV_OUT_DIR");
    if let Some(out) = env_out {
        cmd.env("CMV_OUT_DIR", out);
    }
    cmd.output().unwrap()
}

fn workspace(config: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, config).unwrap();
    (dir, path)
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FREE: &str = r#"{"family": {"kind": "constant", "alpha": [0, 0]}}"#;

#[test]
fn dos_smoke_run() {
    let (dir, _) = workspace(FREE);
    let out = cmv(dir.path(), &["dos", "--config", "config.json", "--out", "o"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/dos.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,weight"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 401);
    assert!(rows.iter().all(|r| (r.1 - 1.0 / 401.0).abs() < 1e-15));
    let k_ac = fs::read_to_string(dir.path().join("o/k_ac.csv")).unwrap();
    assert_eq!(k_ac.lines().next(), Some("theta,k_ac,converged"));
    for line in k_ac.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let value: f64 = cells[1].parse().unwrap();
        assert!((value - 1.0 / std::f64::consts::TAU).abs() < 1e-3 && cells[2] == "1", "{line}");
    }
    let potential = fs::read_to_string(dir.path().join("o/gamma_thouless.csv")).unwrap();
    assert_eq!(potential.lines().count(), 1 + 3 * 16 + 1);
    let manifest = read_json(&dir.path().join("o/manifest.json"));
    assert_eq!(manifest["params"]["n"], 200);
    assert_eq!(manifest["code_version"], "cmv-cli 0.1.0");
    assert_eq!(manifest["overrides"]["out"], "o");
}

#[test]
fn random_theorem1_is_vacuous_success() {
    let (dir, _) = workspace(
        r#"{"family": {"kind": "random_iid", "radius": 0.5, "seed": 7},
            "plan": {"mode": "monte_carlo", "samples": 8, "seed": 3},
            "params": {"zero_set": {"grid": 64}}}"#,
    );
    let out = cmv(dir.path(), &["theorem1", "--config", "config.json"], None);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("cmv-out/report.json"));
    assert_eq!(report["vacuous"], true);
    assert_eq!(report["passed"], true);
    assert!(report["evidence"]["min_gamma"].as_f64().unwrap() >= 1e-2);
}

#[test]
fn config_errors_exit_one_without_output() {
    let cases = [
        r#"{"family": {"kind": "constant", "alpha": [1.5, 0]}}"#,
        r#"{"family": {"kind": "constant", "alpha": [0.5, 0]}, "params": {"n": 0}}"#,
        r#"{"family": {"kind": "constant", "alpha": [0.5, 0]}, "params": {"unknown": 1}}"#,
        r#"{"family": {"kind": "quasiperiodic", "coupling": 0.3, "frequency": 0.6, "phase": 0}}"#,
        "not json",
    ];
    for config in cases {
        let (dir, _) = workspace(config);
        let out = cmv(dir.path(), &["dos", "--config", "config.json"], None);
        assert_eq!(out.status.code(), Some(1), "{config}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], "config");
        assert!(!dir.path().join("cmv-out").exists());
    }
    let (dir, _) = workspace(FREE);
    assert_eq!(cmv(dir.path(), &["dos", "--config", "missing.json"], None).status.code(), Some(1));
    assert_eq!(cmv(dir.path(), &["nope", "--config", "config.json"], None).status.code(), Some(1));
    assert_eq!(
        cmv(dir.path(), &["dos", "--config", "config.json", "--threads", "0"], None).status.code(),
        Some(1)
    );
}

#[test]
fn numerical_failure_exits_two_without_output() {
    // A huge spectral parameter overflows between rescalings.
    let (dir, _) = workspace(
        r#"{"family": {"kind": "constant", "alpha": [0.5, 0]},
            "params": {"grid": {"radii": [1e200], "angles": 1, "extra": []},
                       "length": 100, "cocycle": {"rescale_period": 50}}}"#,
    );
    let out = cmv(dir.path(), &["lyapunov", "--config", "config.json"], None);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "numerical");
    assert!(!dir.path().join("cmv-out").exists());
}

#[test]
fn environment_and_seed_overrides_are_echoed() {
    let (dir, _) = workspace(
        r#"{"family": {"kind": "random_iid", "radius": 0.5, "seed": 7},
            "plan": {"mode": "monte_carlo", "samples": 3, "seed": 1},
            "params": {"n": 20}}"#,
    );
    let out = cmv(dir.path(), &["dos", "--config", "config.json", "--seed", "42"], Some("env-out"));
    assert_eq!(out.status.code(), Some(0));
    let manifest = read_json(&dir.path().join("env-out/manifest.json"));
    assert_eq!(manifest["overrides"]["CMV_OUT_DIR"], "env-out");
    assert_eq!(manifest["overrides"]["seed"], 42);
    assert_eq!(manifest["family"]["seed"], 42);
    assert_eq!(manifest["plan"]["seed"], 42);

    let plain = cmv(dir.path(), &["dos", "--config", "config.json", "--out", "plain"], Some("env-out"));
    assert_eq!(plain.status.code(), Some(0));
    let a = fs::read_to_string(dir.path().join("env-out/dos.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("plain/dos.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn rerunning_from_the_manifest_reproduces_the_artifacts() {
    let (dir, _) = workspace(
        r#"{"family": {"kind": "periodic", "alphas": [[0.3, 0], [0, -0.4]]},
            "params": {"grid": 64, "length": 2000}}"#,
    );
    assert_eq!(cmv(dir.path(), &["zeroset", "--config", "config.json", "--out", "a"], None).status.code(), Some(0));
    assert_eq!(cmv(dir.path(), &["zeroset", "--config", "a/manifest.json", "--out", "b"], None).status.code(), Some(0));
    for name in ["gamma.csv", "arcs.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let (a, b) = (read_json(&dir.path().join("a/manifest.json")), read_json(&dir.path().join("b/manifest.json")));
    assert_eq!(a["params"], b["params"]);
    assert_eq!(a["family"], b["family"]);
    let arcs = fs::read_to_string(dir.path().join("a/arcs.csv")).unwrap();
    assert_eq!(arcs.lines().filter(|l| l.starts_with("raw,")).count(), 2);
}

#[test]
fn schur_and_lyapunov_tables() {
    let (dir, _) = workspace(
        r#"{"family": {"kind": "constant", "alpha": [0.5, 0]},
            "params": {"angles": 4, "ladder": {"m_hi": 10}}}"#,
    );
    assert_eq!(cmv(dir.path(), &["schur", "--config", "config.json"], None).status.code(), Some(0));
    let nu = fs::read_to_string(dir.path().join("cmv-out/nu_ac.csv")).unwrap();
    assert_eq!(nu.lines().next(), Some("theta,nu_ac,std_error,converged"));
    assert_eq!(nu.lines().count(), 5);
    let defect = fs::read_to_string(dir.path().join("cmv-out/defect.csv")).unwrap();
    let values: Vec<f64> = defect.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 7);
    assert!(values.windows(2).all(|w| w[1] < w[0]));

    let (dir, _) = workspace(
        r#"{"family": {"kind": "constant", "alpha": [0, 0]},
            "params": {"grid": {"radii": [0.5, 2.0], "angles": 4, "extra": []}, "length": 1000}}"#,
    );
    assert_eq!(cmv(dir.path(), &["lyapunov", "--config", "config.json"], None).status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("cmv-out/lyapunov.csv")).unwrap();
    for line in table.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let expected = (cells[0].hypot(cells[1])).ln().max(0.0);
        assert!((cells[2] - expected).abs() < 1e-2, "{line}");
    }
}
