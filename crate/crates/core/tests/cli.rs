use std::path::Path;
use std::process::Command;

use ckn_core::cli::{run, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn ckn(args: &[&str]) -> i32 {
    run(std::iter::once("ckn").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap().get(idx).unwrap().to_string()).collect()
}

#[test]
fn convert_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    assert_eq!(ckn(&["convert", "--N", "3", "--a", "-1", "--b", "-0.5", "--out", out.to_str().unwrap()]), EXIT_OK);
    let v = read_json(&out);
    assert_eq!(v["result"]["lambda"].as_f64(), Some(2.25));
    assert_eq!(v["result"]["p"].as_f64(), Some(3.0));
    assert_eq!(v["config"]["command"], "convert");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("2.2500000000000000e0"));
}

#[test]
fn spectrum_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(ckn(&["spectrum", "--N", "3", "--p", "3", "--lambda", "1", "--out", out.to_str().unwrap()]), EXIT_OK);
    let r = &read_json(&out)["result"];
    assert_eq!(r["mu1_closed_form"].as_f64(), Some(0.75));
    assert!((r["lambda0_numeric"].as_f64().unwrap() + 2.25).abs() < 1e-3);
}

#[test]
fn exit_statuses() {
    let bin = env!("CARGO_BIN_EXE_ckn");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["convert", "--N", "3", "--a", "-1"]), EXIT_USAGE);
    assert_eq!(status(&["convert", "--N", "3", "--a", "-1", "--b", "-0.5", "--lambda", "1", "--p", "3"]), EXIT_USAGE);
    assert_eq!(status(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(status(&["convert", "--N", "3", "--a", "2", "--b", "2.5"]), EXIT_DOMAIN);
    assert_eq!(status(&["constants", "--N", "3", "--lambda", "1", "--p", "7"]), EXIT_DOMAIN);
    let out = Command::new(bin).args(["spectrum", "--N", "3", "--lambda", "-1", "--p", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DOMAIN));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Λ = -1"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ckn"))
        .args(["dual", "--N", "3", "--a", "-1", "--b", "-0.5"])
        .env("CKN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = read_json(&dir.path().join("dual.json"));
    assert_eq!(v["result"]["dual"]["a"].as_f64(), Some(2.0));
    assert_eq!(v["result"]["dual"]["lambda"].as_f64(), Some(2.25));
}

#[test]
fn outputs_are_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["fs-curve", "--N", "3", "--points", "25"], "fs.csv"),
        (vec!["radial", "--N", "3", "--a", "-1", "--b", "-0.5", "--points", "31"], "radial.csv"),
        (vec!["constants", "--N", "4", "--lambda", "0.7", "--p", "3.1"], "const.json"),
        (vec!["scaling-check", "--N", "2", "--lambda", "1.5", "--p", "4", "--field", "w-star"], "scal.json"),
        (vec!["minimize", "--N", "3", "--lambda", "3", "--p", "3", "--nt", "201", "--nphi", "6"], "min.json"),
        (vec!["fs-curve", "--N", "5", "--points", "5", "--format", "json"], "fs.json"),
        (vec!["scan", "--N", "3", "--p-grid", "3", "--tol", "0.2", "--nt", "201", "--nphi", "6"], "scan.csv"),
        (vec!["scan", "--N", "2", "--p-grid", "4", "--tol", "0.2", "--nt", "201", "--nphi", "6", "--format", "json"], "scan.json"),
    ];
    for (args, name) in cases {
        let first = p(name);
        let second = p(&format!("again-{name}"));
        let replayed = p(&format!("replay-{name}"));
        let mut a1 = args.clone();
        a1.extend(["--out", &first]);
        let mut a2 = args.clone();
        a2.extend(["--out", &second]);
        assert_eq!(ckn(&a1), EXIT_OK, "{args:?}");
        assert_eq!(ckn(&a2), EXIT_OK);
        assert_eq!(ckn(&["replay", "--from", &first, "--out", &replayed]), EXIT_OK);
        let bytes = std::fs::read(&first).unwrap();
        assert_eq!(bytes, std::fs::read(&second).unwrap(), "{name} not deterministic");
        assert_eq!(bytes, std::fs::read(&replayed).unwrap(), "{name} replay differs");
    }
}

#[test]
fn coarse_scan_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let args = ["scan", "--N", "3", "--p-grid", "2.5,3,4", "--tol", "0.05", "--nt", "401", "--nphi", "8"];
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(ckn(&full), EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# config: {"));
    let fs: Vec<f64> = csv_column(&out, "lambda_fs").iter().map(|s| s.parse().unwrap()).collect();
    for (got, want) in fs.iter().zip([32.0 / 9.0, 1.6, 2.0 / 3.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    let lam: Vec<f64> = csv_column(&out, "lambda_star_num").iter().map(|s| s.parse().unwrap()).collect();
    let width: Vec<f64> = csv_column(&out, "bracket_width").iter().map(|s| s.parse().unwrap()).collect();
    let a_star: Vec<f64> = csv_column(&out, "a_star_num").iter().map(|s| s.parse().unwrap()).collect();
    for k in 0..3 {
        assert!(width[k] <= 0.05 && lam[k] <= fs[k] + width[k] + 0.02 * fs[k], "p index {k}");
    }
    assert!(a_star.windows(2).all(|w| w[0] < w[1]), "{a_star:?}");
    assert!(csv_column(&out, "converged").iter().all(|s| s == "true"));
}
