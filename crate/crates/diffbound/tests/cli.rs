//! End-to-end tests of the `diffbound` binary: CSV shape, manifests,
//! determinism, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diffbound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).expect("output exists");
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bound_density_ou_writes_121_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ou.csv");
    let o = run(&[
        "bound-density",
        "--example", "ou",
        "--t", "1", "--x", "0",
        "--w-from", "-3", "--w-to", "3", "--w-step", "0.05",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 122); // header + 121 grid points
    assert_eq!(rows[0], vec!["w", "lower", "upper", "reference", "g_delta", "exact", "flags"]);
    for row in &rows[1..] {
        assert_eq!(row.len(), 7);
        let lower: f64 = row[1].parse().unwrap();
        let upper: f64 = row[2].parse().unwrap();
        let exact: f64 = row[5].parse().unwrap();
        assert!(lower <= exact && exact <= upper, "{row:?}");
        assert_eq!(row[6], "degenerate_lower");
    }

    let manifest_path = dir.path().join("ou.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "bound-density");
    assert_eq!(manifest["example"], "ou");
    assert_eq!(manifest["resolved"]["reference"], "brownian");
    assert!((manifest["resolved"]["M"].as_f64().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("feller.json");
    std::fs::write(
        &model,
        r#"{"drift": "p*y + q", "diffusion": "sqrt(2*r*y)",
            "params": {"p": 1.0, "q": 2.5, "r": 1.0},
            "interval": [0.0, "inf"], "x0": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("feller.csv");
    let o = run(&[
        "bound-density",
        "--model", model.to_str().unwrap(),
        "--d", "4.7",
        "--t", "0.5", "--x", "0.5",
        "--w-from", "0.2", "--w-to", "3", "--w-step", "0.2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 16);
    // no exact column registered for file models
    assert!(rows[1][5].is_empty());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("feller.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["resolved"]["reference"], "bessel");
    assert_eq!(manifest["resolved"]["d"].as_f64().unwrap(), 4.7);
}

#[test]
fn missing_model_file_exits_2() {
    let o = run(&[
        "bound-density",
        "--model", "/nonexistent/model.json",
        "--t", "1", "--x", "0",
        "--w-from", "0", "--w-to", "1", "--w-step", "0.5",
        "--out", "/tmp/never-written.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_simulation_size_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = run(&[
        "simulate",
        "--example", "ou",
        "--t", "1", "--x", "0",
        "--n", "0",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_example_exits_2() {
    let o = run(&[
        "bound-density",
        "--example", "heston",
        "--t", "1", "--x", "0",
        "--w-from", "0", "--w-to", "1", "--w-step", "0.5",
        "--out", "/tmp/never-written-2.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let common = [
        "simulate",
        "--example", "trunc-ou",
        "--t", "1", "--x", "0",
        "--n", "4000", "--steps", "50",
        "--w-from", "-2", "--w-to", "2", "--w-step", "0.5",
    ];
    for (path, seed, threads) in [(&a, "42", None), (&b, "42", Some("1")), (&c, "43", None)] {
        let mut cmd = bin();
        cmd.args(common).args(["--seed", seed, "--out", path.to_str().unwrap()]);
        if let Some(t) = threads {
            cmd.env("DIFFBOUND_THREADS", t);
        }
        let o = cmd.output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // same seed: identical bytes, even with a different thread count
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // different seed: different output
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn simulate_with_barrier_appends_crossing_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = run(&[
        "simulate",
        "--example", "ou",
        "--t", "1", "--x", "0",
        "--n", "2000", "--steps", "50",
        "--seed", "1",
        "--barrier", "0.5",
        "--w-from", "-1", "--w-to", "1", "--w-step", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "crossing_frequency");
    let freq: f64 = last[1].parse().unwrap();
    assert!(freq > 0.0 && freq < 1.0);
}

#[test]
fn crossing_curve_over_time_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eta.csv");
    let o = run(&[
        "bound-crossing",
        "--example", "ou",
        "--x", "-0.5", "--level", "0", "--w", "-0.5",
        "--t-from", "0.05", "--t-to", "1", "--t-step", "0.05",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 21);
    for row in &rows[1..] {
        let upper: f64 = row[2].parse().unwrap();
        let exact: f64 = row[5].parse().unwrap();
        assert!(exact <= upper, "{row:?}");
    }
}

#[test]
fn cdf_upper_bound_is_clamped() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cdf.csv");
    let o = run(&[
        "bound-cdf",
        "--example", "ou",
        "--t", "1", "--x", "0",
        "--w-from", "-2", "--w-to", "8", "--w-step", "0.5",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    for row in &rows[1..] {
        let upper: f64 = row[2].parse().unwrap();
        let raw: f64 = row[3].parse().unwrap();
        assert!(upper <= 1.0 + 1e-12);
        assert!(raw >= upper - 1e-12);
    }
}

#[test]
fn lm_overrides_reach_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = run(&[
        "bound-density",
        "--example", "trunc-ou",
        "--t", "1", "--x", "0",
        "--w-from", "0", "--w-to", "0", "--w-step", "1",
        "--L", "1", "--M", "-1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("d.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["resolved"]["L"].as_f64().unwrap(), 1.0);
    assert_eq!(manifest["resolved"]["M"].as_f64().unwrap(), -1.0);
}

#[test]
fn optimize_d_records_chosen_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = run(&[
        "bound-density",
        "--example", "feller",
        "--optimize-d",
        "--t", "0.5", "--x", "0.5",
        "--w-from", "0.5", "--w-to", "2", "--w-step", "0.5",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("f.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    let d = manifest["resolved"]["d"].as_f64().unwrap();
    assert!((3.0..=12.0).contains(&d), "chosen d = {d}");
}

#[test]
fn examples_lists_builtins() {
    let o = run(&["examples"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["ou", "trunc-ou", "feller"] {
        assert!(text.contains(name), "missing {name} in listing");
    }
}

#[test]
fn asymptotic_csv_matches_library_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("asym.csv");
    let o = run(&[
        "asymptotic",
        "--example", "ou",
        "--t", "0.01", "--x", "0.4",
        "--w-from", "0", "--w-to", "1", "--w-step", "0.25",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows[0], vec!["w", "asymptotic", "exact"]);
    for row in &rows[1..] {
        let asym: f64 = row[1].parse().unwrap();
        let exact: f64 = row[2].parse().unwrap();
        assert!(((asym - exact) / exact).abs() < 0.01, "{row:?}");
    }
}
