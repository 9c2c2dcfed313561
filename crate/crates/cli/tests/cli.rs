use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn parashoot(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_parashoot"));
    cmd.args(args).env_remove("PARASHOOT_OUT");
    if let Some(dir) = env_out {
        cmd.env("PARASHOOT_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn run_in(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    parashoot(&args, None)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error report is JSON")
}

/// Writes an ad hoc config next to the outputs.
fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const PAIR: &str = r#"
[problem]
alpha = 1.0
centres = [{ x = -0.5, y = 0.0, mass = 1.0 }, { x = 0.5, y = 0.0, mass = 1.0 }]
"#;

#[test]
fn solve_bolza_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("solve-bolza", &config("benchmark.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report = json(&dir.path().join("bolza.json"));
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    let summary = &report["solution"];
    assert_eq!(summary["radius"], 10.0);
    assert_eq!(summary["parity_bits"], serde_json::json!([1, 0]));
    assert_eq!(summary["separates"], true);
    assert_eq!(summary["self_intersections"], 0);
    assert!(summary["relative_energy_residual"].as_f64().unwrap() <= 1e-3);

    let csv = std::fs::read_to_string(dir.path().join("bolza.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# parashoot "));
    assert!(lines.next().unwrap().starts_with("t,"));
    assert_eq!(lines.count() as u64, summary["samples"].as_u64().unwrap());
    assert!(dir.path().join("bolza.svg").exists());
}

#[test]
fn same_seed_reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = run_in("solve-bolza", &config("benchmark.toml"), d.path(), &["--seed", "3"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["bolza.json", "bolza.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}

#[test]
fn environment_overrides_out_flag() {
    let (flag, env) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("benchmark.toml");
    let out = parashoot(
        &["kepler-angle", "--config", cfg.to_str().unwrap(), "--out", flag.path().to_str().unwrap()],
        Some(env.path()),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(env.path().join("kepler.json").exists());
    assert!(!flag.path().join("kepler.json").exists());
}

#[test]
fn improper_partition_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{PAIR}\n[scattering]\ntheta_minus = -1.0\ntheta_plus = 1.0\npartition = [0, 1]\n");
    let cfg = write_config(dir.path(), &body);
    let out = run_in("solve-bolza", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_of(&out);
    assert_eq!(err["error"]["code"], "invalid-partition");
    assert_eq!(err["exit"], 2);
}

#[test]
fn equal_directions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{PAIR}\n[scattering]\ntheta_minus = 0.5\ntheta_plus = 0.5\npartition = [0]\n");
    let cfg = write_config(dir.path(), &body);
    let out = run_in("solve-entire", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "invalid-input");
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{PAIR}\n[scattering]\ntheta_minus = -1.0\ntheta_plus = 1.0\npartition = [0]\nspin = 2\n");
    let cfg = write_config(dir.path(), &body);
    let out = run_in("solve-bolza", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "config-parse");

    let out = run_in("solve-bolza", &dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "config-unreadable");
}

#[test]
fn schedule_below_twice_the_ring_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{PAIR}\n[scattering]\ntheta_minus = -1.0\ntheta_plus = 1.0\npartition = [0]\n[continuation]\nradii = [4.0, 8.0]\n"
    );
    let cfg = write_config(dir.path(), &body);
    let out = run_in("solve-entire", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "invalid-schedule");
}

#[test]
fn single_radius_schedule_skips_the_fits() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{PAIR}\n[scattering]\ntheta_minus = -1.5707963267948966\ntheta_plus = 1.0471975511965976\npartition = [0]\n\
         [continuation]\nradii = [10.0]\n"
    );
    let cfg = write_config(dir.path(), &body);
    let out = run_in("solve-entire", &cfg, dir.path(), &[]);
    assert!(matches!(out.status.code(), Some(0 | 3)));
    let report = json(&dir.path().join("entire.json"));
    assert_eq!(report["radii"], serde_json::json!([10.0]));
    assert!(report["tail_fits"].is_null());
    assert!(report["action_scaling"].is_null());
    assert!(dir.path().join("bolza_r0.csv").exists());
    assert!(!dir.path().join("entire.csv").exists());
}

#[test]
fn solve_entire_reports_fits_on_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("solve-entire", &config("benchmark.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("entire.json"));
    assert_eq!(report["converged"], true);
    let fit = &report["tail_fits"]["radius_plus"];
    assert!((fit["exponent"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-3);
    assert!((report["action_scaling"]["coefficient"].as_f64().unwrap() - 8.0).abs() < 0.4);
    for j in 0..4 {
        assert!(dir.path().join(format!("bolza_r{j}.csv")).exists());
    }
}

#[test]
fn kepler_angle_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("kepler-angle", &config("benchmark.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("kepler.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row["relative_error"].as_f64().unwrap() <= 1e-2);
    }
}

#[test]
fn collapse_table_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("collapse", &config("benchmark.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("collapse.json"));
    assert_eq!(report["strictly_decreasing"], true);
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_passes_on_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("validate", &config("benchmark.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&dir.path().join("validate.json"))["passed"], true);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn scan_enumerates_the_unordered_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{PAIR}\n[scattering]\ntheta_minus = -1.0\ntheta_plus = 1.0\npartition = [0]\n[continuation]\nradii = [10.0, 20.0]\n\
         [scan]\ndirections = 3\n"
    );
    let cfg = write_config(dir.path(), &body);
    let out = run_in("scan", &cfg, dir.path(), &["--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&dir.path().join("scan.json"));
    assert_eq!(report["partitions"], 1);
    assert_eq!(report["cells"].as_array().unwrap().len(), 3);
    assert_eq!(report["topology_ok"], true);
}

#[test]
fn plot_renders_a_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("benchmark.toml");
    assert_eq!(run_in("solve-bolza", &cfg, dir.path(), &[]).status.code(), Some(0));
    let csv = dir.path().join("bolza.csv");
    let plots = dir.path().join("plots");
    let out = run_in("plot", &cfg, &plots, &[csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(plots.join("bolza.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<path"));
}
