use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_bicoherent");

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> i32 {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn reports(out: &Path) -> Vec<Value> {
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    serde_json::from_str::<Value>(&text)
        .unwrap()
        .as_array()
        .unwrap()
        .clone()
}

fn status_of<'a>(reports: &'a [Value], id: &str) -> Vec<&'a str> {
    reports
        .iter()
        .filter(|r| r["check_id"] == id)
        .map(|r| r["status"].as_str().unwrap())
        .collect()
}

const IDENTITY: &str = "schema = 1\ndim = 16\nz_samples = [[0.0, 0.0], [0.05, -0.05]]\n\n[map]\nkind = \"identity\"\n";
const PROJECTOR: &str =
    "schema = 1\ndim = 16\nz_samples = [[0.1, 0.0], [0.0, 2.0]]\n\n[map]\nkind = \"projector\"\nu_index = 0\n";

#[test]
fn identity_run_passes_and_writes_every_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "id.toml", IDENTITY);
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &cfg, &out), 0);
    for f in ["report.txt", "report.json", "residuals.csv", "quadrature.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let reps = reports(&out);
    assert!(reps.iter().all(|r| r["status"] == "pass"));
    assert_eq!(reps[0]["check_id"], "riesz.construction");
    let quad = fs::read_to_string(out.join("quadrature.csv")).unwrap();
    assert!(quad.starts_with("dim,radial_count,angular_count,deviation"));
}

#[test]
fn unknown_key_is_a_configuration_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &format!("{IDENTITY}\n[tolerances]\nladdr = 1e-9\n"));
    assert_eq!(run(&["verify"], &cfg, &dir.path().join("out")), 2);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_config_is_a_configuration_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["verify"], &dir.path().join("nope.toml"), &dir.path().join("out")),
        2
    );
}

#[test]
fn ill_conditioned_map_fails_construction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "ill.toml",
        "schema = 1\ndim = 8\nmax_cond = 100.0\n\n[map]\nkind = \"random\"\ncond = 1e6\nseed = 1\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &cfg, &out), 1);
    let reps = reports(&out);
    assert_eq!(reps.len(), 1);
    assert_eq!(reps[0]["status"], "fail");
    assert!(reps[0]["message"].as_str().unwrap().contains("cond"));
}

#[test]
fn tightened_tolerance_fails_the_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "tight.toml",
        "schema = 1\ndim = 8\n\n[map]\nkind = \"random\"\ncond = 4.0\nseed = 3\n\n[tolerances]\nbiorthogonality = 1e-30\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &cfg, &out), 1);
    assert_eq!(status_of(&reports(&out), "biorthogonality"), ["fail"]);
}

#[test]
fn strict_turns_out_of_regime_into_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "proj.toml", PROJECTOR);
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &cfg, &out), 0);
    assert_eq!(status_of(&reports(&out), "displacement.bch"), ["pass", "out-of-regime"]);
    assert_eq!(status_of(&reports(&out), "rbcs.eigen"), ["pass", "out-of-regime"]);
    assert_eq!(run(&["verify", "--strict"], &cfg, &out), 1);
}

#[test]
fn overrides_change_dimension_and_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "rand.toml",
        "schema = 1\ndim = 8\nz_samples = [[0.1, 0.1]]\n\n[map]\nkind = \"random\"\ncond = 3.0\nseed = 1\n",
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(run(&["verify", "--dim", "12"], &cfg, &a), 0);
    assert!(reports(&a).iter().all(|r| r["params"]["dim"] == 12));
    assert_eq!(run(&["verify", "--dim", "12"], &cfg, &b), 0);
    assert_eq!(run(&["verify", "--dim", "12", "--seed", "2"], &cfg, &c), 0);
    let residuals = |d: &Path| fs::read_to_string(d.join("residuals.csv")).unwrap();
    assert_eq!(residuals(&a), residuals(&b));
    assert_ne!(residuals(&a), residuals(&c));
    assert_eq!(run(&["verify", "--dim", "2"], &cfg, &c), 2);
}

#[test]
fn map_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = 6;
    let entries: Vec<[f64; 2]> = (0..d * d)
        .map(|k| {
            if k % (d + 1) == 0 {
                [2.0, 0.0]
            } else if k == 1 {
                [0.5, 0.25]
            } else {
                [0.0, 0.0]
            }
        })
        .collect();
    let record = serde_json::json!({ "dim": d, "entries": entries });
    fs::write(dir.path().join("map.json"), record.to_string()).unwrap();
    let cfg = write_config(
        &dir,
        "file.toml",
        "schema = 1\ndim = 6\nz_samples = [[0.0, 0.0]]\n\n[map]\nkind = \"file\"\npath = \"map.json\"\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &cfg, &out), 0);
    assert_eq!(status_of(&reports(&out), "biorthogonality"), ["pass"]);

    let wrong_dim = write_config(
        &dir,
        "wrong.toml",
        "schema = 1\ndim = 8\n\n[map]\nkind = \"file\"\npath = \"map.json\"\n",
    );
    assert_ne!(run(&["verify"], &wrong_dim, &dir.path().join("w")), 0);
}

#[test]
fn converge_writes_one_row_per_dimension_and_sample() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "proj.toml", PROJECTOR);
    let out = dir.path().join("out");
    assert_eq!(run(&["converge", "--dims", "8,16"], &cfg, &out), 0);
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dim,z_re,z_im,bch_residual,eigen_residual,resolution_deviation,out_of_regime"
    );
    assert_eq!(lines.count(), 4);
    assert_eq!(run(&["converge", "--dims", "16,8"], &cfg, &out), 2);
}

#[test]
fn wavefunctions_need_a_projector_map() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "proj.toml", PROJECTOR);
    let out = dir.path().join("out");
    assert_eq!(run(&["emit-wavefunctions"], &cfg, &out), 0);
    let table = fs::read_to_string(out.join("wavefunction_1.csv")).unwrap();
    assert!(table.starts_with("x,re_big_phi,im_big_phi,re_phi,im_phi,re_psi,im_psi"));
    assert_eq!(table.lines().count(), 602);
    assert!(out.join("wavefunction_0.csv").is_file());

    let id = write_config(&dir, "id.toml", IDENTITY);
    assert_eq!(run(&["emit-wavefunctions"], &id, &dir.path().join("id")), 2);
}
