use std::path::Path;
use std::process::{Command, Output};

fn weakval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakval"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const WORKED: &str = r#"{"epsilon": 0.7853981633974483,
  "i0": 0.426776695296637, "i1": 0.073223304703363,
  "i2": 0.25, "i3": 0.25, "i4": 0.073223304703363, "i5": 0.426776695296637}"#;

#[test]
fn help_and_usage_codes() {
    assert_eq!(weakval(&["--help"]).status.code(), Some(0));
    assert_eq!(weakval(&["--version"]).status.code(), Some(0));
    assert_eq!(weakval(&[]).status.code(), Some(1));
    assert_eq!(weakval(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        weakval(&["sweep", "--threads", "many"]).status.code(),
        Some(1)
    );
}

#[test]
fn estimate_worked_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "i.json", WORKED);
    let out = weakval(&["estimate", &path]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = v["weak_value"]["R"].as_f64().unwrap();
    assert!((r + 0.41421356237309503).abs() < 1e-9);
    let nu = v["preselection"]["nu"].as_f64().unwrap();
    assert!((nu - 1.3065629648763766).abs() < 1e-9);
    let phi = v["preselection"]["phi"].as_f64().unwrap();
    assert!((phi - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn estimate_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let no_eps = write(
        dir.path(),
        "a.json",
        r#"{"i0":0.4,"i1":0.1,"i2":0.2,"i3":0.3,"i4":0.2,"i5":0.3}"#,
    );
    assert_eq!(weakval(&["estimate", &no_eps]).status.code(), Some(1));
    assert_eq!(
        weakval(&["estimate", &no_eps, "--epsilon", "0.5"])
            .status
            .code(),
        Some(0)
    );
    let zero = write(
        dir.path(),
        "b.json",
        r#"{"epsilon":0.5,"i0":0,"i1":0.1,"i2":0.2,"i3":0.3,"i4":0.2,"i5":0.3}"#,
    );
    let out = weakval(&["estimate", &zero]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
    let missing = dir.path().join("nope.json");
    assert_eq!(
        weakval(&["estimate", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let garbage = write(dir.path(), "c.json", "{");
    assert_eq!(weakval(&["estimate", &garbage]).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let out = weakval(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_then_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"epsilon_grid":[0.3,0.8,1.9],"phi_samples":3,"repetitions":4}"#,
    );
    let json = dir.path().join("s.json");
    let csv = dir.path().join("s.csv");
    let out = weakval(&[
        "sweep",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--noise",
        "paper",
        "--out-json",
        json.to_str().unwrap(),
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 10);
    let plots = dir.path().join("plots");
    let out = weakval(&[
        "plot-data",
        json.to_str().unwrap(),
        "--out-dir",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for p in ["R", "I", "nu", "alpha", "phi"] {
        let text = std::fs::read_to_string(plots.join(format!("merit_{p}.csv"))).unwrap();
        assert!(text.starts_with("epsilon,ln_sigma_bar,ln_delta_bar\n"));
        assert_eq!(text.lines().count(), 4);
    }
}

#[test]
fn sweep_to_stdout_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"epsilon_grid":[0.3],"phi_samples":2}"#,
    );
    let out = weakval(&["sweep", "--config", &cfg, "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("epsilon,phi_target,alpha_i,R_t,"));
    let unknown = write(dir.path(), "u.json", r#"{"shotz": 3}"#);
    assert_eq!(
        weakval(&["sweep", "--config", &unknown]).status.code(),
        Some(2)
    );
    let singular = write(
        dir.path(),
        "s.json",
        r#"{"epsilon_grid":[1.5707963267948966]}"#,
    );
    assert_eq!(
        weakval(&["sweep", "--config", &singular]).status.code(),
        Some(2)
    );
    let bad_noise = write(
        dir.path(),
        "n.json",
        r#"{"t1_us":[10,10],"t2_us":[30,10],"depol_1q":0,"depol_2q":0,"dur_1q_ns":0,"dur_2q_ns":0,"dur_readout_ns":0,"readout_p01":[0,0],"readout_p10":[0,0]}"#,
    );
    assert_eq!(
        weakval(&["sweep", "--config", &cfg, "--noise", &bad_noise])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        weakval(&["sweep", "--noise", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        weakval(&[
            "sweep",
            "--config",
            &cfg,
            "--exact",
            "--out-csv",
            unwritable.to_str().unwrap()
        ])
        .status
        .code(),
        Some(3)
    );
}
