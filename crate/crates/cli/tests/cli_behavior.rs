//! End-to-end tests of the `frns` binary: every subcommand is exercised
//! through a real process, and the documented exit codes are asserted
//! against the process status, not against internal return values.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frns_core::grid::{read_checkpoint, write_checkpoint, BoxSpec};
use frns_core::solver::{make_initial, InitSpec};
use frns_core::turbulence::spectrum_model;

fn frns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frns"))
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("failed to spawn the frns binary");
    (
        status.code().expect("process terminated by signal"),
        String::from_utf8_lossy(&stdout).into_owned(),
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

/// Parses the two-column table that `frns params` prints.
fn parse_params_table(stdout: &str) -> HashMap<String, String> {
    stdout
        .lines()
        .skip(1)
        .filter_map(|line| {
            let mut it = line.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.to_string()))
        })
        .collect()
}

fn table_value(table: &HashMap<String, String>, key: &str) -> f64 {
    table
        .get(key)
        .unwrap_or_else(|| panic!("missing row {key}"))
        .parse()
        .unwrap_or_else(|_| panic!("row {key} is not a number"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("empty csv")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect();
    (header, rows)
}

fn column<'a>(
    header: &[String],
    rows: &'a [Vec<String>],
    name: &str,
) -> impl Iterator<Item = &'a str> + 'a {
    let idx = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("missing column {name}"));
    rows.iter().map(move |r| r[idx].as_str())
}

/// A minimal valid configuration with every knob the tests vary exposed.
fn config_text(n: usize, delta: f64, out_dir: &Path, extra_solver: &str) -> String {
    format!(
        r#"
[grid]
n = {n}

[solver]
nu = 0.05
dt = 1e-2
t_end = 0.2
output_every = 5
seed = 11
{extra_solver}

[criterion]
s = 0.75
q = 12.0
delta = {delta}
eta = 0.01
c0 = 1.0

[init]
kind = "taylor_green"
amplitude = 0.1

[outputs]
directory = "{}"
emit_spectra = false
emit_structure = false
checkpoint_every = 1
"#,
        out_dir.display()
    )
}

// ---------------------------------------------------------------------------
// params
// ---------------------------------------------------------------------------

#[test]
fn params_prints_the_derived_table() {
    let (code, stdout, _) = run(frns().args(["params", "--s", "0.75", "--q", "12", "--eta", "0.01"]));
    assert_eq!(code, 0, "params exit code");
    let table = parse_params_table(&stdout);

    assert!((table_value(&table, "p") - 8.0).abs() < 1e-12);
    assert!((table_value(&table, "delta_max") - 0.125).abs() < 1e-12);
    assert!((table_value(&table, "theta") - 18.0 / 34.0).abs() < 1e-12);
    // The product theta * p is reported, not assumed: for this pair it
    // is 8 * 18/34, which is not 2, and the flag must say so.
    assert!((table_value(&table, "theta_p") - 8.0 * 18.0 / 34.0).abs() < 1e-12);
    assert_eq!(table["theta_p_equals_2"], "no");
    let mu = table_value(&table, "mu");
    assert!(mu > 0.0 && mu < 1.0, "mu = {mu} must sit in (0, 1)");
}

#[test]
fn params_reports_the_scaling_exponent_for_other_pairs() {
    let (code, stdout, _) = run(frns().args(["params", "--s", "0.9", "--q", "5"]));
    assert_eq!(code, 0);
    let table = parse_params_table(&stdout);
    assert!((table_value(&table, "p") - 10.0).abs() < 1e-12);
}

#[test]
fn params_rejects_a_boundary_pair_with_exit_2() {
    let (code, _, stderr) = run(frns().args(["params", "--s", "0.75", "--q", "6"]));
    assert_eq!(code, 2, "boundary pair must exit 2, stderr: {stderr}");
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[test]
fn simulate_runs_the_bundled_config_and_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let bundled = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/small_data_tg.toml");
    let (code, stdout, stderr) = run(frns()
        .current_dir(tmp.path())
        .args(["simulate", bundled.to_str().unwrap()]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");

    let out = tmp.path().join("runs/small_data_tg");
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("checkpoints/final.fns").is_file());
    assert!(out.join("spectra/spec_000000.csv").is_file());
    assert!(out.join("structure/struct_000000.csv").is_file());

    // 50 steps sampled every 5 gives 11 records, all satisfying the
    // energy inequality.
    let (header, rows) = read_csv(&out.join("diagnostics.csv"));
    assert_eq!(rows.len(), 11);
    assert!(column(&header, &rows, "energy_ok").all(|v| v == "true"));
    assert!(header.iter().any(|h| h == "criterion_integral"));
    assert!(header.iter().any(|h| h == "ys_l2"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "completed");
    assert_eq!(manifest["energy_ok"], true);
    assert_eq!(manifest["records"], 11);
    assert_eq!(manifest["smallness"]["holds"], true);
    let sha = manifest["config_sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);
    assert!(sha.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(manifest["stamp"].as_str().unwrap().ends_with(&sha[..12]));

    // The embedded config text round-trips to the same hash, so the
    // manifest alone is enough to reproduce the run.
    let embedded = manifest["config_toml"].as_str().unwrap();
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(embedded.as_bytes());
    assert_eq!(format!("{:x}", h.finalize()), sha);
}

#[test]
fn simulate_rejects_an_inadmissible_delta_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("bad.toml");
    std::fs::write(&cfg_path, config_text(16, 0.2, &tmp.path().join("out"), "")).unwrap();
    let (code, _, stderr) = run(frns().args(["simulate", cfg_path.to_str().unwrap()]));
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(
        stderr.contains("admissible window"),
        "stderr must explain the delta constraint: {stderr}"
    );
}

#[test]
fn simulate_resume_reproduces_the_full_run_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let full_dir = tmp.path().join("full");
    let resume_dir = tmp.path().join("resumed");

    let full_cfg = tmp.path().join("full.toml");
    std::fs::write(&full_cfg, config_text(16, 0.05, &full_dir, "")).unwrap();
    let (code, stdout, stderr) = run(frns().args(["simulate", full_cfg.to_str().unwrap()]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");

    // Restart halfway (step 10 of 20, t = 0.1) into a directory that is
    // the only difference between the two configurations.
    let mid = full_dir.join("checkpoints/ckpt_000010.fns");
    assert!(mid.is_file(), "expected a halfway checkpoint");
    let resume_cfg = tmp.path().join("resume.toml");
    std::fs::write(&resume_cfg, config_text(16, 0.05, &resume_dir, "")).unwrap();
    let (code, stdout, stderr) = run(frns().args([
        "simulate",
        resume_cfg.to_str().unwrap(),
        "--resume",
        mid.to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");

    let full_final = std::fs::read(full_dir.join("checkpoints/final.fns")).unwrap();
    let resumed_final = std::fs::read(resume_dir.join("checkpoints/final.fns")).unwrap();
    assert_eq!(full_final, resumed_final, "resumed run must match bit for bit");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(resume_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert!((manifest["t_initial"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!(manifest["resumed_from"].as_str().unwrap().contains("ckpt_000010"));
}

#[test]
fn simulate_reruns_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut finals = Vec::new();
    let mut diags = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let cfg = tmp.path().join(format!("{name}.toml"));
        let text = format!(
            r#"
[grid]
n = 16

[solver]
nu = 0.05
dt = 1e-3
t_end = 0.02
output_every = 10
seed = 42

[criterion]
s = 0.75
q = 12.0
delta = 0.05
eta = 0.01
c0 = 1.0

[init]
kind = "random_spectrum"
amplitude = 0.2
spectrum_slope = -1.6666666666666667
peak_k = 3.0

[outputs]
directory = "{}"
emit_spectra = false
emit_structure = false
checkpoint_every = 0
"#,
            dir.display()
        );
        std::fs::write(&cfg, text).unwrap();
        let (code, stdout, stderr) = run(frns().args(["simulate", cfg.to_str().unwrap()]));
        assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
        finals.push(std::fs::read(dir.join("checkpoints/final.fns")).unwrap());
        diags.push(std::fs::read(dir.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(finals[0], finals[1], "final states must be byte-identical");
    assert_eq!(diags[0], diags[1], "diagnostics must be byte-identical");
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[test]
fn analyze_locates_the_energy_of_a_single_mode_field() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = BoxSpec::new(16).unwrap();
    let u = make_initial(spec, &InitSpec::shear(1.0), 0).unwrap();
    let ck = tmp.path().join("shear.fns");
    write_checkpoint(&ck, &u.to_physical(), 0.5).unwrap();

    let out = tmp.path().join("analysis");
    let (code, stdout, stderr) = run(frns().args([
        "analyze",
        ck.to_str().unwrap(),
        "--spectra",
        "--nu",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");

    let (header, rows) = read_csv(&out.join("spectrum.csv"));
    let e: Vec<f64> = column(&header, &rows, "e_k")
        .map(|v| v.parse().unwrap())
        .collect();
    let k: Vec<usize> = column(&header, &rows, "k")
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(k.first(), Some(&1));
    assert!(
        (e[0] - 0.25).abs() < 1e-12,
        "shell 1 must carry the whole energy, got {}",
        e[0]
    );
    for (kk, ee) in k.iter().zip(&e).skip(1) {
        assert!(*ee < 1e-20, "shell {kk} should be empty, got {ee}");
    }
    assert!(out.join("analysis.json").is_file());
}

#[test]
fn analyze_rejects_a_truncated_checkpoint_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = BoxSpec::new(16).unwrap();
    let u = make_initial(spec, &InitSpec::taylor_green(1.0), 0).unwrap();
    let ck = tmp.path().join("broken.fns");
    write_checkpoint(&ck, &u.to_physical(), 0.0).unwrap();
    let bytes = std::fs::read(&ck).unwrap();
    std::fs::write(&ck, &bytes[..bytes.len() / 2]).unwrap();
    // Guard the guard: the untruncated file must still read back.
    let full = tmp.path().join("full.fns");
    std::fs::write(&full, &bytes).unwrap();
    read_checkpoint(&full).unwrap();

    let (code, _, stderr) = run(frns().args(["analyze", ck.to_str().unwrap()]));
    assert_eq!(code, 2, "stderr: {stderr}");
}

#[test]
fn analyze_fits_a_tabulated_spectrum_to_two_percent() {
    let tmp = tempfile::tempdir().unwrap();
    let (c_true, beta_true, k0, delta, eps) = (1.5, 0.8, 2.0, 0.3, 1.0);
    let mut text = String::from("k,e_k\n");
    for k in 1..=48usize {
        let kk = (k as f64).max(k0);
        let e = spectrum_model(kk, k0, eps, beta_true, delta, c_true).unwrap();
        text.push_str(&format!("{k},{e:.16e}\n"));
    }
    let file = tmp.path().join("tabulated.csv");
    std::fs::write(&file, text).unwrap();

    let (code, stdout, stderr) = run(frns().args([
        "analyze",
        "--spectrum-file",
        file.to_str().unwrap(),
        "--eps",
        "1.0",
        "--nu",
        "0.005",
        "--k0",
        "2",
        "--delta",
        "0.3",
    ]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let c_fit = summary["fit"]["c_kolm"].as_f64().unwrap();
    let b_fit = summary["fit"]["beta_t"].as_f64().unwrap();
    let residual = summary["fit"]["residual"].as_f64().unwrap();
    assert!(
        (c_fit - c_true).abs() / c_true < 0.02,
        "c_kolm = {c_fit}, want {c_true} within 2%"
    );
    assert!(
        (b_fit - beta_true).abs() / beta_true < 0.02,
        "beta_t = {b_fit}, want {beta_true} within 2%"
    );
    assert!(residual < 1e-6, "residual = {residual}");
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[test]
fn verify_multifractal_passes_and_prints_json() {
    let (code, stdout, stderr) = run(frns().args(["verify", "multifractal"]));
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
    let reports: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let suites = reports.as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "multifractal");
    assert_eq!(suites[0]["pass"], true);
    for check in suites[0]["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "failed check: {check}");
    }
}

#[test]
fn verify_rejects_an_unknown_suite_with_exit_2() {
    let (code, _, stderr) = run(frns().args(["verify", "nonsense"]));
    assert_eq!(code, 2);
    assert!(stderr.contains("nonsense"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// environment
// ---------------------------------------------------------------------------

#[test]
fn thread_pool_env_is_validated() {
    let (code, _, stderr) = run(frns()
        .env("FRNS_THREADS", "abc")
        .args(["params", "--s", "0.75", "--q", "12"]));
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("FRNS_THREADS"), "stderr: {stderr}");

    let (code, _, _) = run(frns()
        .env("FRNS_THREADS", "2")
        .args(["params", "--s", "0.75", "--q", "12"]));
    assert_eq!(code, 0);
}
