//! End-to-end tests of the `pinsker` binary: output schemas, determinism,
//! and the documented exit codes (0 ok, 1 verification failure, 2 config
//! error, 3 numeric failure).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pinsker"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const BASE: &str = r#"
[kernel]
preset = "rbf"

[problem]
dimension = 9
gamma = "13/10"
s = 1

[simulation]
reps = 20
seed = 5

[curves]
s = ["1"]
gamma_min = "1/2"
gamma_max = "3"
gamma_step = "1/2"
"#;

#[test]
fn spectrum_csv_schema_and_known_rows() {
    let dir = tempfile::tempdir().unwrap();
    // preset "linear" on S^9: single harmonic block with mu_1 = 1/10.
    let cfg = write(
        dir.path(),
        "lin.toml",
        "[kernel]\npreset = \"linear\"\n\n[problem]\ndimension = 9\ngamma = 1\ns = 1\n",
    );
    let out = run(&["spectrum", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash=cfg-"));
    assert_eq!(lines.next().unwrap(), "degree,eigenvalue,multiplicity,cumulative");
    let rows: Vec<&str> = lines.collect();
    assert!(rows[0].starts_with("0,0"));
    let row1: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(row1[0], "1");
    assert!((row1[1].parse::<f64>().unwrap() - 0.1).abs() < 1e-14);
    assert_eq!(row1[2], "10");
    assert_eq!(row1[3], "11");
}

#[test]
fn spectrum_constant_kernel_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "const.toml",
        "[kernel]\npreset = \"constant\"\n\n[problem]\ndimension = 5\ngamma = 1\ns = 1\n",
    );
    let out = run(&["spectrum", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(data.len(), 1);
    let row: Vec<&str> = data[0].split(',').collect();
    assert_eq!(row[0], "0");
    assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(row[2], "1");
    assert_eq!(row[3], "1");
}

#[test]
fn spectrum_rbf_large_d_scaling() {
    // μ_k·d^k stays within 5% of 1/e for the RBF at d = 1000, k ≤ 3.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rbf.toml",
        "[kernel]\npreset = \"rbf\"\n\n[problem]\ndimension = 1000\ngamma = 1\ns = 1\nk_max = 3\n",
    );
    let out = run(&["spectrum", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let e_inv = (-1.0f64).exp();
    for (k, line) in text.lines().skip(2).enumerate() {
        let mu: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let scaled = mu * 1000f64.powi(k as i32);
        assert!(
            (scaled / e_inv - 1.0).abs() < 0.05,
            "k={k}: μ_k·d^k/e⁻¹ = {}",
            scaled / e_inv
        );
    }
}

#[test]
fn pinsker_synthetic_single_block_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "syn.toml",
        "[spectrum]\nblocks = [[1.0, 1]]\n\n[problem]\ndimension = 2\ngamma = 1\ns = 1\nn = 100\n",
    );
    let out = run(&["pinsker", "--config", &cfg]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["kappa_star"].as_f64().unwrap() - 1.0 / 101.0).abs() < 1e-15);
    assert!((doc["dstar"].as_f64().unwrap() - 1.0 / 101.0).abs() < 1e-15);
    assert_eq!(doc["N"].as_u64().unwrap(), 1);
    assert!(doc["identity_residual"].as_f64().unwrap() < 1e-10);
    assert!(!doc["boundary_ambiguous"].as_bool().unwrap());
    assert!(doc["config_hash"].as_str().unwrap().starts_with("cfg-"));
}

#[test]
fn pinsker_flags_alignment_boundary() {
    let dir = tempfile::tempdir().unwrap();
    // gamma = p(s+1)+s/2 with s = 1, p = 1: gamma = 5/2.
    let cfg = write(
        dir.path(),
        "b.toml",
        "[kernel]\npreset = \"rbf\"\n\n[problem]\ndimension = 30\ngamma = \"5/2\"\ns = 1\n",
    );
    let out = run(&["pinsker", "--config", &cfg]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["boundary_ambiguous"].as_bool().unwrap());
}

#[test]
fn simulate_deterministic_and_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let a = run(&["simulate", "--config", &cfg, "--format", "csv"]);
    let b = run(&["simulate", "--config", &cfg, "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("config_hash,d,gamma,s,reps,mean,stderr,dstar,ratio,seed\n"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[1], "9");
    assert_eq!(row[4], "20");
    // a different seed changes the result
    let c = run(&["simulate", "--config", &cfg, "--format", "csv", "--seed", "6"]);
    assert_ne!(
        String::from_utf8(c.stdout).unwrap().lines().nth(1),
        text.lines().nth(1)
    );
}

#[test]
fn simulate_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let one = bin()
        .args(["simulate", "--config", &cfg, "--format", "json"])
        .env("PINSKER_THREADS", "1")
        .output()
        .unwrap();
    let four = bin()
        .args(["simulate", "--config", &cfg, "--format", "json"])
        .env("PINSKER_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn simulate_zero_reps_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let out = run(&["simulate", "--config", &cfg, "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curves_empty_grid_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "empty.toml",
        "[kernel]\npreset = \"rbf\"\n\n[curves]\ns = [\"1\"]\ngamma_grid = []\n",
    );
    let out = run(&["curves", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curves_emit_csv_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let base = dir.path().join("out");
    let out = run(&[
        "curves",
        "--config",
        &cfg,
        "--out",
        base.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success());
    let rate = std::fs::read_to_string(dir.path().join("out_rate.csv")).unwrap();
    assert!(rate.contains("s,gamma,zeta"));
    assert!(rate.contains("1,1/2,1/2"));
    let constant = std::fs::read_to_string(dir.path().join("out_constant.csv")).unwrap();
    assert!(constant.contains("s,gamma,cstar,regime"));
    let svg = run(&[
        "curves",
        "--config",
        &cfg,
        "--format",
        "svg",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(svg.status.success());
    let fig = std::fs::read_to_string(dir.path().join("out_rate.svg")).unwrap();
    assert!(fig.starts_with("<!-- config_hash=cfg-"));
    assert!(fig.contains("<svg"));
}

#[test]
fn missing_config_file_is_config_error() {
    let out = run(&["spectrum", "--config", "/nonexistent/x.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[problem]\ndimension = 5\ngamma = 1\ns = 1\nwat = true\n",
    );
    let out = run(&["pinsker", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shallow_spectrum_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    // k_max forced far too small for the sample size: cutoff hits the guard.
    let cfg = write(
        dir.path(),
        "shallow.toml",
        "[kernel]\npreset = \"rbf\"\n\n[problem]\ndimension = 20\ngamma = \"5/2\"\ns = 1\nk_max = 2\n",
    );
    let out = run(&["pinsker", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_basis_emits_polynomial_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let out = run(&["verify", "--config", &cfg, "--dump-basis", "3,1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["size"].as_u64().unwrap(), 4);
    // degree-1 functions on S³ are 2·x_i
    let first = &doc["functions"][0][0];
    assert_eq!(first["exponents"].as_array().unwrap().len(), 1);
    assert!((first["coefficient"].as_f64().unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn verify_passes_on_toy_config_and_fails_on_reversed_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", BASE);
    let ok = run(&["verify", "--config", &cfg, "--quiet"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    // negative control: a decreasing d-grid makes |ratio-1| grow, so the
    // monotone convergence check must fail with exit code 1.
    let bad = run(&["verify", "--config", &cfg, "--quiet", "--d-grid", "500,100,50"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("[FAIL]"));
}
