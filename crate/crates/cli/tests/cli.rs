use std::process::{Command, Output};

fn klgamma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klgamma")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("klgamma-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_kl_suite_passes() {
    let out = klgamma(&["verify", "--suite", "kl", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 25);
    assert!(reports.iter().all(|r| r["passed"] == true && r["tolerance"] == 1e-6));
}

#[test]
fn verify_failure_exits_one() {
    let out = klgamma(&["verify", "--suite", "mellin", "--tol", "1e-30", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("name,params,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeded tolerance"));
}

#[test]
fn verify_grid_file() {
    let path = temp_path("grid.json");
    std::fs::write(&path, r#"{"classic": [{"z": 0.5, "s": 1.0}, {"z": {"re": 0.5, "im": 0.5}, "s": 0.0}]}"#).unwrap();
    let out = klgamma(&["verify", "--grid", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out).as_array().unwrap().len(), 2);
    std::fs::write(&path, r#"{"classic": [{"z": 0.5}]}"#).unwrap();
    let out = klgamma(&["verify", "--grid", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn fp_negative_example() {
    let out = klgamma(&["fp", "--p", "-0.5", "--t", "0.25", "--y", "1", "--method", "single"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["correction_terms"].as_array().unwrap().len(), 1);
    assert_eq!(r["method"], "spectral_single");
    assert!((r["value"].as_f64().unwrap() - 0.755_765_006_546_263_8).abs() < 1e-10);
}

#[test]
fn fourier_csv_table() {
    let out = klgamma(&["fourier", "--a", "-0.5", "--xi-grid", "0:4:0.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[0], "a,xi,n,direct,repr,closed,residual");
    for line in &lines[1..] {
        let residual: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(residual < 1e-7, "{line}");
    }
}

#[test]
fn point_evaluations() {
    let r = json(&klgamma(&["gamma", "--z", "-1.5,0.2", "--s", "0.5"]));
    assert!((r["value"]["re"].as_f64().unwrap() - 0.911_697_087_310_039_7).abs() < 1e-12);
    let r = json(&klgamma(&["bessel", "--kind", "k", "--order", "0,2", "--x", "1"]));
    assert!((r["value"]["re"].as_f64().unwrap() - 0.080_616_997_622_365_98).abs() < 1e-12);
    assert_eq!(r["accuracy_warning"], false);
    let r = json(&klgamma(&["psi", "--z", "-0.5", "--n", "0", "--x", "1"]));
    assert!((r["psi"]["re"].as_f64().unwrap() - 0.398_092_769_802_765_4).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["gamma", "--z", "1", "--bogus", "2"][..],
        &["psi", "--z", "-0.5", "--n", "1", "--x", "1"],
        &["fourier", "--a", "0.5", "--xi-grid", "3:1:0.5"],
        &["fp", "--p", "-1", "--t", "0.1", "--y", "1"],
        &["verify", "--suite", "nonsense"],
        &["verify", "--grid", "/nonexistent/grid.json"],
    ] {
        let out = klgamma(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--suite", "mellin", "--format", "csv"];
    let a = klgamma(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_klgamma")).args(args).env("KLGAMMA_THREADS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_klgamma")).args(args).env("KLGAMMA_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_file_and_formats() {
    let path = temp_path("out.json");
    let out = klgamma(&["gamma", "--z", "0.5", "--s", "0", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((r["value"]["re"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-13);
    std::fs::remove_file(&path).unwrap();
    let human = String::from_utf8(klgamma(&["gamma", "--z", "0.5", "--s", "0", "--format", "human"]).stdout).unwrap();
    assert!(human.starts_with("z_re"));
    assert_eq!(human.lines().count(), 2);
}
