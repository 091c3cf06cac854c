use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SPHERE: &str = r#"{"type":"sphere","radius":1.0,"grid":[16,32]}"#;

fn ubvp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ubvp"))
        .args(args)
        .current_dir(dir)
        .env_remove("UBVP_OUT_DIR")
        .output()
        .unwrap()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sphere.json"), SPHERE).unwrap();
    dir
}

fn report(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

/// Copies a trace CSV, replacing every value by `value`.
fn constant_trace(src: &Path, dst: &Path, value: &str) {
    let text = fs::read_to_string(src).unwrap();
    let mut lines = text.lines();
    let mut out = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        out += &format!("{},{value}\n", cols[..4].join(","));
    }
    fs::write(dst, out).unwrap();
}

#[test]
fn consistent_oracle_exits_zero() {
    let dir = workdir();
    let o = ubvp(dir.path(), &["check-laplace", "--surface", "sphere.json", "--oracle", "linear-z", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = report(dir.path(), "r");
    assert!(rep["sup_norm"].as_f64().unwrap() <= 1e-4);
    assert_eq!(rep["consistent"], true);
    let csv = fs::read_to_string(dir.path().join("r/residual.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16 * 32);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), fs::read_to_string(dir.path().join("r/report.json")).unwrap().trim());
}

#[test]
fn constant_pair_is_inconsistent() {
    let dir = workdir();
    let d = dir.path();
    assert_eq!(ubvp(d, &["solve-laplace", "--surface", "sphere.json", "--oracle", "constant", "--given", "u0", "--out", "c"]).status.code(), Some(0));
    constant_trace(&d.join("c/u1.csv"), &d.join("ones.csv"), "1");
    let o = ubvp(d, &["check-laplace", "--surface", "sphere.json", "--u0", "ones.csv", "--u1", "ones.csv", "--out", "r"]);
    assert_eq!(o.status.code(), Some(1));
    let rep = report(d, "r");
    assert!((rep["compatibility"][0].as_f64().unwrap() - 4.0 * PI).abs() < 1e-10);
    let err = stderr_json(&o);
    assert_eq!(err["error"], "inconsistent");

    let o = ubvp(d, &["reconstruct", "--surface", "sphere.json", "--u0", "ones.csv", "--u1", "ones.csv", "--points", "p.csv"]);
    assert_eq!(o.status.code(), Some(2), "missing points file is invalid input");
    fs::write(d.join("p.csv"), "x,y,z\n0,0,0\n").unwrap();
    let o = ubvp(d, &["reconstruct", "--surface", "sphere.json", "--u0", "ones.csv", "--u1", "ones.csv", "--points", "p.csv", "--out", "q"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "incompatible-data");
    assert!((err["value"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-10);
    let o = ubvp(
        d,
        &["reconstruct", "--surface", "sphere.json", "--u0", "ones.csv", "--u1", "ones.csv", "--points", "p.csv", "--allow-inconsistent", "--out", "q"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(d.join("q/values.csv")).unwrap().starts_with("x,y,z,value,near_boundary\n"));
}

#[test]
fn constant_heat_oracle_is_exact() {
    let dir = workdir();
    let o = ubvp(dir.path(), &["check-heat", "--oracle", "constant", "--tmax", "1", "--nt", "64", "--out", "h"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(dir.path(), "h")["sup_norm"].as_f64().unwrap() <= 1e-12);
    let csv = fs::read_to_string(dir.path().join("h/residual.csv")).unwrap();
    assert!(csv.starts_with("t,value\n"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn completions_chain_back_to_a_consistent_pair() {
    let dir = workdir();
    let d = dir.path();
    let o = ubvp(d, &["solve-laplace", "--surface", "sphere.json", "--oracle", "point-source", "--given", "u0", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(d, "a")["oracle_error"].as_f64().unwrap() < 1e-3);
    let o = ubvp(d, &["solve-laplace", "--surface", "sphere.json", "--u1", "a/u1.csv", "--given", "u1", "--out", "b"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(d, "b")["nullspace"]["weighted_sum"], 0.0);
    let o = ubvp(d, &["check-laplace", "--surface", "sphere.json", "--u0", "b/u0.csv", "--u1", "a/u1.csv", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = workdir();
    let d = dir.path();
    let cases: [(&[&str], i32, &str); 6] = [
        (&["check-laplace", "--surface", "missing.json", "--oracle", "constant"], 2, "io"),
        (&["check-laplace", "--surface", "sphere.json", "--oracle", "dodecahedron"], 2, "invalid-argument"),
        (&["check-laplace", "--surface", "sphere.json", "--oracle", "constant", "--u0", "x.csv"], 2, "invalid-argument"),
        (&["check-laplace", "--surface", "sphere.json", "--oracle", "constant", "--tol", "0"], 2, "invalid-argument"),
        (&["no-such-command"], 2, "invalid-argument"),
        (&["solve-laplace", "--surface", "sphere.json", "--oracle", "linear-z", "--given", "u0", "--regularization", "0"], 3, "numeric-failure"),
    ];
    for (args, code, kind) in cases {
        let o = ubvp(d, &[args, &["--out", "e"]].concat());
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        assert_eq!(stderr_json(&o)["error"], kind, "{args:?}");
    }
    fs::write(d.join("torus.json"), r#"{"type":"torus","grid":[4,8]}"#).unwrap();
    let o = ubvp(d, &["check-laplace", "--surface", "torus.json", "--oracle", "constant"]);
    assert_eq!(stderr_json(&o)["error"], "parse");
}

#[test]
fn config_file_matches_flags() {
    let dir = workdir();
    let d = dir.path();
    fs::create_dir(d.join("jobs")).unwrap();
    fs::write(d.join("jobs/sphere.json"), SPHERE).unwrap();
    fs::write(
        d.join("jobs/job.json"),
        r#"{"command":"check-poisson","surface":"sphere.json","oracle":"radial-quadratic","volume-grid":[6,8,16],"out":"cfg"}"#,
    )
    .unwrap();
    assert_eq!(ubvp(d, &["--config", "jobs/job.json"]).status.code(), Some(0));
    let flags = ["check-poisson", "--surface", "sphere.json", "--oracle", "radial-quadratic", "--volume-grid", "6,8,16", "--out", "flags"];
    assert_eq!(ubvp(d, &flags).status.code(), Some(0));
    assert_eq!(fs::read(d.join("jobs/cfg/report.json")).unwrap(), fs::read(d.join("flags/report.json")).unwrap());

    // Flags override the file; the negative volume sign gives 16π.
    let o = ubvp(d, &["--config", "jobs/job.json", "--poisson-sign", "-1", "--out", "minus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!((report(d, "minus")["sup_norm"].as_f64().unwrap() - 16.0 * PI).abs() < 1e-3);
}

#[test]
fn output_directory_from_environment() {
    let dir = workdir();
    let o = Command::new(env!("CARGO_BIN_EXE_ubvp"))
        .args(["check-heat", "--oracle", "linear-x"])
        .current_dir(dir.path())
        .env("UBVP_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from-env/report.json").exists());
}

#[test]
fn heat_completion_from_files() {
    let dir = workdir();
    let d = dir.path();
    // v = 0 beyond x = 4, ψ = 1: φ = -2√(t/π).
    let mut v = String::from("x,value\n");
    for k in 1..=32 {
        v += &format!("{},0\n", k as f64 / 8.0);
    }
    let mut psi = String::from("t,value\n");
    for k in 1..=64 {
        psi += &format!("{},1\n", k as f64 / 64.0);
    }
    fs::write(d.join("v.csv"), v).unwrap();
    fs::write(d.join("psi.csv"), psi).unwrap();
    let o = ubvp(d, &["solve-heat", "--v", "v.csv", "--psi", "psi.csv", "--target", "phi", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let phi = fs::read_to_string(d.join("s/phi.csv")).unwrap();
    for line in phi.lines().skip(1) {
        let (t, p) = line.split_once(',').unwrap();
        let (t, p): (f64, f64) = (t.parse().unwrap(), p.parse().unwrap());
        assert!((p + 2.0 * (t / PI).sqrt()).abs() < 1e-10, "t={t}");
    }
    let o = ubvp(d, &["check-heat", "--v", "v.csv", "--psi", "psi.csv", "--phi", "s/phi.csv", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ubvp(d, &["solve-heat", "--v", "v.csv", "--phi", "s/phi.csv", "--target", "psi", "--out", "back"]);
    assert_eq!(o.status.code(), Some(0));

    fs::write(d.join("tx.csv"), "t,x\n0.5,0.5\n").unwrap();
    let o = ubvp(d, &["reconstruct-heat", "--v", "v.csv", "--psi", "psi.csv", "--points", "tx.csv", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0));
    // Non-compact data without a closed-form tail is rejected.
    let o = ubvp(d, &["check-heat", "--v", "v.csv", "--psi", "psi.csv", "--phi", "s/phi.csv", "--x-decay", "polynomial"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ubvp(d, &["check-heat", "--v", "v.csv", "--psi", "psi.csv", "--phi", "s/phi.csv", "--x-decay", "polynomial", "--v-extension", "0*x", "--out", "ext"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn convergence_table() {
    let dir = workdir();
    let o = ubvp(dir.path(), &["convergence", "--op", "solve-u1", "--grids", "4,8,16", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("c/convergence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["grid", "unknowns", "error", "ratio", "order"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][3], "");
    let errs: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errs[2] < errs[1] && errs[1] < errs[0]);
    let o = ubvp(dir.path(), &["convergence", "--op", "heat-psi", "--oracle", "exp-growth", "--grids", "16,32", "--out", "h"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn diagnostics() {
    let dir = workdir();
    let d = dir.path();
    let o = ubvp(d, &["dump-operator", "--surface", "sphere.json", "--kernel", "double-layer", "--out", "op"]);
    assert_eq!(o.status.code(), Some(0));
    let n = 16 * 32;
    let bytes = fs::read(d.join("op/operator.bin")).unwrap();
    assert_eq!(bytes.len(), 16 + 8 * n * n);
    let o = ubvp(d, &["check-convexity", "--surface", "sphere.json", "--out", "cv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((report(d, "cv")["c0_estimate"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
