use std::path::Path;
use std::process::{Command, Output};

fn logweyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logweyl")).args(args).output().unwrap()
}

/// `key = value` from a text report.
fn field(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.trim_start().strip_prefix('=').map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{text}"))
}

fn num(out: &Output, key: &str) -> f64 {
    field(out, key).parse().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn coeffs_closed_form_d2() {
    let out = logweyl(&["coeffs", "--dim", "2"]);
    assert!(out.status.success());
    assert!((num(&out, "gamma2_closed") - 0.5).abs() <= 1e-12);
    assert!((num(&out, "gamma1_closed") + 0.25).abs() <= 1e-12);
}

#[test]
fn coeffs_both_reports_small_difference() {
    let out = logweyl(&["coeffs", "--dim", "1", "--method", "both"]);
    assert!(out.status.success());
    assert!(num(&out, "gamma1_difference") <= 1e-6);
    assert!(num(&out, "gamma2_difference") <= 1e-6);
}

#[test]
fn coeffs_rejects_zero_dimension() {
    let out = logweyl(&["coeffs", "--dim", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn spectrum_harmonic_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let out = logweyl(&[
        "spectrum", "--operator", "harmonic", "--grid", "1024", "--half-width", "10", "--count", "20",
        "--csv", p(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<f64> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.parse().unwrap()).collect();
    assert_eq!(rows.len(), 20);
    assert!((rows[0] - 1.0).abs() < 1e-4);
    assert!(dir.path().join("h.json").exists());
}

#[test]
fn spectrum_unconfined_window_fails() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let out = logweyl(&[
        "spectrum", "--half-width", "2", "--grid", "256", "--count", "10", "--window", "400", "--csv", p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("confine"));
}

#[test]
fn spectrum_below_min_trusted_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let out = logweyl(&[
        "spectrum", "--half-width", "2", "--grid", "256", "--count", "10", "--min-trusted", "9", "--csv", p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn flow_orthogonal_state_returns_after_two_pi() {
    let t = format!("{}", std::f64::consts::TAU);
    let out = logweyl(&["flow", "--omega", "1,0", "--theta", "0,1", "--t", &t]);
    assert!(out.status.success());
    assert!(num(&out, "distance_numeric_to_start") <= 1e-8);
    assert!((num(&out, "return_time") - std::f64::consts::TAU).abs() <= 1e-12);
}

#[test]
fn flow_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = logweyl(&["flow", "--dim", "3", "--seed", "4", "--t", "3", "--samples", "30", "--csv", p(&csv)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 31);
}

#[test]
fn fit_on_exact_data_has_tiny_residual() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let mut text = String::from("# lambda,N\n");
    for i in 0..120 {
        let l = 10.0 * 1.05f64.powi(i);
        let n = 0.7 * l * l.ln() - 0.3 * l;
        text.push_str(&format!("{l:.17e},{n:.17e}\n"));
    }
    std::fs::write(&pts, text).unwrap();
    let out = logweyl(&["fit", p(&pts), "--exponent", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(num(&out, "residual_sup") <= 1e-9);
    assert!((num(&out, "w_1_0") - 0.7).abs() <= 1e-9);
    assert!((num(&out, "w_0_0") + 0.3).abs() <= 1e-9);
}

#[test]
fn fit_missing_file_is_io_error() {
    let out = logweyl(&["fit", "/definitely/not/here.csv", "--exponent", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn zeta_below_abscissa_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let ok = logweyl(&[
        "spectrum", "--operator", "harmonic", "--grid", "512", "--half-width", "8", "--count", "10",
        "--csv", p(&csv),
    ]);
    assert!(ok.status.success());
    let out = logweyl(&["zeta", p(&csv), "--s", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = logweyl(&["zeta", p(&csv), "--s", "2"]);
    assert!(out.status.success());
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["coeffs", "--dim", "3", "--method", "both"],
        &["flow", "--dim", "3", "--seed", "11", "--t", "5"],
        &["measure", "--dim", "2", "--seed", "3", "--count", "50"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let paths = [dir.path().join(format!("{i}a.json")), dir.path().join(format!("{i}b.json"))];
        for path in &paths {
            let mut full = args.to_vec();
            full.extend(["--json", p(path)]);
            assert!(logweyl(&full).status.success());
        }
        let a = std::fs::read(&paths[0]).unwrap();
        assert_eq!(a, std::fs::read(&paths[1]).unwrap());
        let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(v["command"], args[0]);
    }
}
