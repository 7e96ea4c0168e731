use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf-spectral"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cmds: [&[&str]; 4] = [
        &["spectrum", "--preset", "gasket", "--level", "3"],
        &["commutator", "--preset", "gasket", "--level", "3", "--seed", "11"],
        &["invariance", "--preset", "gasket", "--level", "3", "--seed", "11"],
        &["kernels", "--preset", "interval", "--level", "6"],
    ];
    for args in cmds {
        assert!(run(args, a.path()).status.success());
        assert!(run(args, b.path()).status.success());
    }
    for name in ["spectrum.csv", "svals.csv", "summability.json", "invariance.json", "kernels.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn constant_function_has_zero_singular_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "commutator",
            "--preset",
            "gasket",
            "--level",
            "3",
            "--fn",
            r#"{"type":"harmonic","level":0,"boundary_values":[2,2,2]}"#,
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svals = read(dir.path(), "svals.csv");
    let mut lines = svals.lines();
    assert_eq!(lines.next(), Some("rank,sigma"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(rows.iter().all(|&s| s <= 1e-12));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "summability.json")).unwrap();
    assert_eq!(v["zero_count"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn function_spec_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("f.json");
    fs::write(&spec, r#"{"type":"random-harmonic","level":1,"seed":4}"#).unwrap();
    let out = run(&["commutator", "--preset", "gasket", "--level", "2", "--fn", spec.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    assert!(read(dir.path(), "summability.json").contains("random-harmonic-l1-s4"));
}

#[test]
fn missing_definition_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["describe", "--def", "/definitely/not/here.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.json"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["describe"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--preset", "gasket", "--level", "11"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["describe", "--preset", "square"], dir.path()).status.code(), Some(2));
    assert_eq!(
        run(&["commutator", "--preset", "gasket", "--level", "3", "--p", "1.2"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn describe_reports_exponent() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["describe", "--preset", "gasket"], dir.path()).status.success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "describe.json")).unwrap();
    let d = v["d_s"].as_f64().unwrap();
    assert!((d - 2.0 * 3f64.ln() / 5f64.ln()).abs() < 1e-10);
    assert_eq!(v["lattice"], true);
    assert!(v["meta"]["wall_clock"].is_null());
    assert_eq!(v["meta"]["definition_digest"].as_str().unwrap().len(), 64);

    assert!(run(&["describe", "--preset", "interval", "--record-time"], dir.path()).status.success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "describe.json")).unwrap();
    assert!((v["d_s"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(v["harmonic"]["deviation"].as_f64().unwrap() <= 1e-12);
    assert!(v["meta"]["wall_clock"].as_f64().is_some());
}

#[test]
fn failing_harmonic_structure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let def = dir.path().join("bad.json");
    fs::write(
        &def,
        r#"{"name":"gasket-half","N":3,"n0":3,
            "gluings":[[1,2,2,1],[2,3,3,2],[1,3,3,1]],
            "harmonic":{"D":[[2,-1,-1],[-1,2,-1],[-1,-1,2]],"r":[0.5,0.5,0.5]},
            "measure":{"mu":[0.3333333333333333,0.3333333333333333,0.3333333333333334]}}"#,
    )
    .unwrap();
    let out = run(&["describe", "--def", def.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn interval_spectrum_matches_continuum() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["spectrum", "--preset", "interval", "--level", "8"], dir.path()).status.success());
    let csv = read(dir.path(), "spectrum.csv");
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((first / pi2 - 1.0).abs() < 0.01);

    assert!(run(&["spectrum", "--preset", "interval", "--level", "6", "--bc", "neumann"], dir.path())
        .status
        .success());
    let csv = read(dir.path(), "spectrum.csv");
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(first.abs() < 1e-8);
}

#[test]
fn weyl_report_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["weyl", "--preset", "interval", "--level", "8", "--tol", "0.02"], dir.path())
        .status
        .success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "weyl.json")).unwrap();
    assert!((v["fit"]["slope"].as_f64().unwrap() - 0.5).abs() <= 0.02);
    assert!(v["volume"].is_null());
    assert!(v["volume_note"].as_str().unwrap().contains("non-lattice"));
}
