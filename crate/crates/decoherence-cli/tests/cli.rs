use std::path::Path;
use std::process::{Command, Output};

use decoherence::{decoherence_zero_temperature_closed, BeamParameters, LengthUnit, PathPairGeometry};
use decoherence_cli::point::parse_row;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_decoherence"));
    c.env_remove("DECOHERENCE_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// P is the twelfth column.
fn p_of(row: &str) -> f64 {
    row.split(',').nth(11).unwrap().parse().unwrap()
}

const SWEEP: &str = r#"
[geometry]
kind = "halfplane"
unit = "lambda_T"
d1 = [0.5, 2.0]
d2 = { start = 1.0, stop = 30.0, count = 3, spacing = "log" }
d_perp = [0.0, 0.7]

[beam]
beta = [0.3, 0.9]

[thermal]
temperature = ["300", 77.0]
"#;

fn sweep_file(dir: &Path, name: &str, text: &str, workers: Option<&str>) -> (Output, String) {
    let cfg = dir.join(format!("{name}.toml"));
    std::fs::write(&cfg, text).unwrap();
    let out = dir.join(format!("{name}.csv"));
    let mut c = bin();
    if let Some(w) = workers {
        c.env("DECOHERENCE_WORKERS", w);
    }
    let o = c.args(["sweep", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]).output().unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (o, csv)
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let o = run(&["compute", "--geometry", "halfplane", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn ribbon_without_width_names_the_flag() {
    let o = run(&["compute", "--geometry", "ribbon", "--d1", "0.1", "--d2", "0.2", "--beta", "0.5", "--unit", "W"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--width"));
}

#[test]
fn malformed_and_out_of_domain_values_exit_2() {
    assert_eq!(run(&["compute", "--geometry", "halfplane", "--d1", "x", "--d2", "1", "--beta", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--geometry", "halfplane", "--d1", "1", "--d2", "2", "--beta", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--geometry", "halfplane", "--d1", "-1", "--d2", "2", "--beta", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["compute", "--geometry", "halfplane", "--d1", "1", "--d2", "2", "--beta", "0.5", "--unit", "lambda_T"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["compute", "--geometry", "halfplane", "--d1", "1", "--d2", "2", "--beta", "0.5", "--width", "1"]).status.code(),
        Some(2)
    );
    let o = bin()
        .env("DECOHERENCE_WORKERS", "zero")
        .args(["figure", "3e", "--output", "-"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coincident_paths_give_zero_at_any_temperature() {
    for t in ["zero", "4", "300"] {
        let o = run(&["compute", "--geometry", "halfplane", "--d1", "1e-4", "--d2", "1e-4", "--beta", "0.5", "--temperature", t]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(p_of(stdout(&o).lines().nth(1).unwrap()), 0.0);
    }
}

#[test]
fn zero_temperature_compute_equals_closed_form() {
    let o = run(&["compute", "--geometry", "halfplane", "--d1", "1", "--d2", "10", "--beta", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let p = p_of(stdout(&o).lines().nth(1).unwrap());
    let beam = BeamParameters::new(0.9).unwrap();
    let closed =
        decoherence_zero_temperature_closed(&PathPairGeometry::new(1.0, 10.0, 0.0, LengthUnit::Meters).unwrap(), &beam).unwrap();
    assert!((p - closed).abs() <= 1e-6 * closed);
}

#[test]
fn single_point_sweep_equals_compute() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[geometry]\nkind = \"halfplane\"\nunit = \"m\"\nd1 = 1e-5\nd2 = 3e-4\nd_perp = 2e-5\n\n[beam]\nbeta = 0.7\n\n[thermal]\ntemperature = 300\n";
    let (o, csv) = sweep_file(dir.path(), "one", text, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = run(&[
        "compute", "--geometry", "halfplane", "--unit", "m", "--d1", "1e-5", "--d2", "3e-4", "--dperp", "2e-5", "--beta", "0.7",
        "--temperature", "300",
    ]);
    assert_eq!(stdout(&c), csv);
}

#[test]
fn rows_follow_declaration_order_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = sweep_file(dir.path(), "a", SWEEP, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 3 * 2 * 2 * 2);
    // beta varies faster than d_perp, temperature fastest
    let first = parse_row(rows[0]).unwrap();
    let second = parse_row(rows[1]).unwrap();
    let third = parse_row(rows[2]).unwrap();
    assert_eq!((first.d1, first.d2, first.d_perp, first.beta), (second.d1, second.d2, second.d_perp, second.beta));
    assert_ne!(first.temperature, second.temperature);
    assert_ne!(first.beta, third.beta);
    for row in &rows {
        let again = parse_row(row).unwrap().evaluate().unwrap();
        assert_eq!(again.csv(), *row);
    }

    // move [beam] ahead of [geometry]: same rows, beta now slowest
    let (head, tail) = SWEEP.split_once("[beam]").unwrap();
    let permuted = format!("[beam]{tail}\n{head}");
    let (o, csv2) = sweep_file(dir.path(), "b", &permuted, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows2: Vec<&str> = csv2.lines().skip(1).collect();
    let mut sorted1 = rows.clone();
    let mut sorted2 = rows2.clone();
    sorted1.sort();
    sorted2.sort();
    assert_eq!(sorted1, sorted2);
    let half = rows2.len() / 2;
    assert!(rows2[..half].iter().all(|r| parse_row(r).unwrap().beta == 0.3));
}

#[test]
fn worker_count_does_not_change_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let (_, one) = sweep_file(dir.path(), "w1", SWEEP, Some("1"));
    let (_, three) = sweep_file(dir.path(), "w3", SWEEP, Some("3"));
    let (_, default) = sweep_file(dir.path(), "wd", SWEEP, None);
    assert!(!one.is_empty());
    assert_eq!(one, three);
    assert_eq!(one, default);
    assert!(dir.path().join("w1.csv.timing.csv").exists());
}

#[test]
fn config_errors_report_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SWEEP.replace("beta = [0.3, 0.9]", "beta = [0.3, \"fast\"]");
    let (o, _) = sweep_file(dir.path(), "bad", &bad, None);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("beam.beta") && msg.contains(":10:"), "{msg}");

    let empty = SWEEP.replace("d1 = [0.5, 2.0]", "d1 = []");
    let (o, _) = sweep_file(dir.path(), "empty", &empty, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("geometry.d1"));

    let ribbon = SWEEP.replace("kind = \"halfplane\"", "kind = \"ribbon\"");
    let (o, _) = sweep_file(dir.path(), "ribbon", &ribbon, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("width"));

    let (o, _) = sweep_file(dir.path(), "syntax", "[geometry\nkind =", None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn unconverged_ribbon_quadrature_exits_3() {
    let o = run(&[
        "compute", "--geometry", "ribbon", "--unit", "W", "--width", "1e-3", "--d1", "0.1", "--d2", "0.4", "--beta", "0.5",
        "--panels", "4", "--max-level", "1", "--rel-tol", "1e-15",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn figure_2c_has_a_zero_row_at_equal_distances() {
    let o = run(&["figure", "2c", "--output", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("1.0000000000000000e0,")).unwrap();
    assert!(row.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0));
    assert_eq!(text.lines().next().unwrap().split(',').count(), 7);
}

#[test]
fn figure_3e_high_temperature_prefactor_starts_at_one_half() {
    let o = run(&["figure", "3e", "--output", "-"]);
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    let v: f64 = first.split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-6);
}

#[test]
fn unknown_figure_is_rejected() {
    assert_eq!(run(&["figure", "9z"]).status.code(), Some(2));
}

#[test]
fn figures_are_idempotent() {
    let a = stdout(&run(&["figure", "s4b", "--output", "-"]));
    let b = stdout(&run(&["figure", "s4b", "--output", "-"]));
    assert_eq!(a, b);
}

#[test]
fn verify_flags_drift_from_the_pinned_table() {
    let dir = tempfile::tempdir().unwrap();
    let pinned = dir.path().join("pinned.csv");
    let report = dir.path().join("report.csv");
    let o = run(&[
        "verify", "--group", "velocity_factor", "--output", report.to_str().unwrap(), "--write-pinned",
        pinned.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["verify", "--group", "velocity_factor", "--output", report.to_str().unwrap(), "--pinned", pinned.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    // a production value moved by one part in a thousand
    let text = std::fs::read_to_string(&pinned).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let (head, value) = lines[1].rsplit_once(',').unwrap();
    let moved: f64 = value.parse::<f64>().unwrap() * (1.0 + 1e-3);
    lines[1] = format!("{head},{moved:.16e}");
    std::fs::write(&pinned, lines.join("\n") + "\n").unwrap();
    let o = run(&["verify", "--group", "velocity_factor", "--output", report.to_str().unwrap(), "--pinned", pinned.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(std::fs::read_to_string(&report).unwrap().contains("DRIFT"));
}
