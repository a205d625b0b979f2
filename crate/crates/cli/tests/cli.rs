use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn spade(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spade")).arg("--out").arg(dir).args(args).output().expect("spade runs")
}

fn report(out: &Output) -> BTreeMap<String, f64> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .filter_map(|(k, v)| v.parse().ok().map(|v| (k.to_string(), v)))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.conf");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn limits_defaults_and_power_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&spade(dir.path(), &["limits"]));
    assert!(rel(r["theta_d_rad"], 3.29e-3) < 0.01);
    assert!(rel(r["photon_flux_per_s"], 1.95e16) < 0.01);
    assert!(rel(r["imprecision_ql_rad2_per_hz"], 6.9e-23) < 0.02);
    assert!(dir.path().join("limits_report.txt").exists());

    let cfg = config(dir.path(), "beam.power_w = 5e-3\n");
    let doubled = report(&spade(dir.path(), &["--config", &cfg, "limits"]));
    assert!(rel(doubled["imprecision_ql_rad2_per_hz"], r["imprecision_ql_rad2_per_hz"] / 2.0) < 1e-12);
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "beam.waist_m = 0\n");
    let out = spade(dir.path(), &["--config", &cfg, "limits"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[config]"), "{err}");
    assert!(err.contains("beam.waist_m"), "{err}");

    let cfg = config(dir.path(), "sweep.stop_m = -1\n");
    let out = spade(dir.path(), &["--config", &cfg, "misalign"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn misalign_sweep_columns() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&spade(dir.path(), &["misalign"]));
    assert!(rel(r["imprecision_closed_rad2_per_hz"], 5e-22) < 0.25);
    assert!(r["sweep.max_relative_difference"] < 0.01);

    let text = std::fs::read_to_string(dir.path().join("misalign.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x_s_m,eta_closed,eta_numeric,S_imp_rad2_per_Hz,S_imp00_rad2_per_Hz");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 0.19);
    assert!(rel(first[2], 0.19) < 1e-6);
}

#[test]
fn synth_then_calibrate_recovers_injection() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    report(&spade(d, &["--seed", "42", "synth"]));
    let spectrum = d.join("spectrum.csv");
    let detector = d.join("detector.csv");
    let shot = d.join("shot.csv");
    let r = report(&spade(
        d,
        &["calibrate", "--spectrum", spectrum.to_str().unwrap(), "--detector", detector.to_str().unwrap(), "--shot", shot.to_str().unwrap()],
    ));
    assert!(rel(r["gain_v2_per_rad2"], 1e6) < 0.02);
    assert!(rel(r["imprecision_rad2_per_hz"], 5e-22) < 0.02);
    assert!(rel(r["shot.slope_v2_per_hz_w"], 2.0 * 1.602176634e-19 * 1e8) < 0.1);
    let calibrated = std::fs::read_to_string(d.join("calibrated.csv")).unwrap();
    assert!(calibrated.lines().nth(1).unwrap().starts_with("freq_hz,psd_rad2_per_hz"));

    let knife = report(&spade(d, &["knife", "--input", d.join("knife.csv").to_str().unwrap()]));
    assert!(rel(knife["knife.w0_m"], 150e-6) < 0.02);

    let ring = report(&spade(d, &["ringdown", "--input", d.join("ringdown.csv").to_str().unwrap()]));
    assert!(rel(ring["ringdown.quality_factor"], 65e6) < 1e-3);
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    report(&spade(a.path(), &["--seed", "7", "synth"]));
    report(&spade(b.path(), &["--seed", "7", "synth"]));
    for name in ["spectrum.csv", "detector.csv", "ringdown.csv", "knife.csv", "shot.csv", "coupling.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    report(&spade(c.path(), &["--seed", "8", "synth"]));
    assert_ne!(std::fs::read(a.path().join("spectrum.csv")).unwrap(), std::fs::read(c.path().join("spectrum.csv")).unwrap());
}

#[test]
fn cool_reports_reference_budget() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&spade(dir.path(), &["cool"]));
    assert!(r["n_m"] > 1000.0 && r["n_m"] < 1400.0, "{}", r["n_m"]);
    assert!(rel(r["n_m_backaction_bound"], 0.8363) < 1e-3);
}

#[test]
fn parse_errors_carry_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "position_m,power_w\n1e-6,1e-3\nnot,a number\n").unwrap();
    let out = spade(dir.path(), &["knife", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");

    let out = spade(dir.path(), &["knife", "--input", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn plots_accompany_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "scan.points = 11\n");
    report(&spade(dir.path(), &["--config", &cfg, "--plot", "scan"]));
    let svg = std::fs::read_to_string(dir.path().join("scan.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(dir.path().join("area.svg").exists());
}
