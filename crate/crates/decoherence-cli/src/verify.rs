//! Oracle regression run: every production/oracle pair plus a drift check
//! of production values against the pinned table in `data/`.

use std::collections::HashMap;

use decoherence::oracle::{regression_table, Measure, OracleReport};
use decoherence::{decoherence_zero_temperature_closed, BeamParameters, LengthUnit, PathPairGeometry};

use crate::error::{CliError, CliResult};
use crate::point::{float, parse_row, Geometry, Point, Temperature};
use crate::sweep::{evaluate_with_workers, render};

pub const PINNED: &str = include_str!("../data/oracle_regression.csv");
pub const PINNED_HEADER: &str = "group,quantity,production";

/// Relative drift allowed between a production value and its pinned copy.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct VerifiedRow {
    pub group: String,
    pub report: OracleReport,
    pub pinned: Option<f64>,
}

impl VerifiedRow {
    pub fn drift_ok(&self) -> bool {
        match self.pinned {
            None => false,
            Some(p) => {
                let x = self.report.production;
                (x.is_nan() && p.is_nan()) || x == p || (x - p).abs() <= DRIFT_TOLERANCE * p.abs()
            }
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.report.passed(), self.pinned.is_some(), self.drift_ok()) {
            (false, _, _) => "FAIL",
            (true, false, _) => "UNPINNED",
            (true, true, false) => "DRIFT",
            (true, true, true) => "PASS",
        }
    }
}

pub fn group_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = regression_table().iter().map(|c| c.name).collect();
    names.push("cli");
    names
}

/// Rows of the CLI group: command-level checks that have an exact answer.
pub fn cli_rows() -> Vec<OracleReport> {
    let mut rows = Vec::new();
    let base = Point {
        geometry: Geometry::HalfPlane,
        unit: LengthUnit::Meters,
        d1: 1.0,
        d2: 10.0,
        d_perp: 0.0,
        beta: 0.9,
        temperature: Temperature::Zero,
        width: None,
        panels: None,
        rel_tol: crate::point::HALFPLANE_REL_TOL,
        max_level: None,
    };
    let closed = BeamParameters::new(0.9)
        .and_then(|b| decoherence_zero_temperature_closed(&PathPairGeometry::new(1.0, 10.0, 0.0, LengthUnit::Meters)?, &b))
        .unwrap_or(f64::NAN);
    let computed = base.evaluate().map(|r| r.p).unwrap_or(f64::NAN);
    rows.push(OracleReport::new(
        "compute(halfplane,T=0,d2/d1=10,beta=0.9) vs closed form",
        computed,
        closed,
        1e-6,
        Measure::Relative,
        "closed form",
    ));
    let coincident = Point {
        d2: 1.0,
        temperature: Temperature::Kelvin(300.0),
        ..base
    };
    rows.push(OracleReport::new(
        "compute(halfplane,d1=d2,T=300K)",
        coincident.evaluate().map(|r| r.p).unwrap_or(f64::NAN),
        0.0,
        0.0,
        Measure::Absolute,
        "exact",
    ));

    let mut grid = Vec::new();
    for &d2 in &[2.0, 10.0, 1e3] {
        for temperature in [Temperature::Zero, Temperature::Kelvin(300.0)] {
            grid.push(Point {
                d1: 1e-5,
                d2: 1e-5 * d2,
                temperature,
                ..base
            });
        }
    }
    let one = evaluate_with_workers(&grid, Some(1)).map(|r| render(&r));
    let many = evaluate_with_workers(&grid, Some(4)).map(|r| render(&r));
    let differing = match (&one, &many) {
        (Ok(a), Ok(b)) => a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() as f64,
        _ => f64::NAN,
    };
    rows.push(OracleReport::new(
        "sweep rows differing between 1 and 4 workers",
        differing,
        0.0,
        0.0,
        Measure::Absolute,
        "byte comparison",
    ));
    let mismatched = one
        .map(|text| {
            text.lines()
                .skip(1)
                .filter(|line| {
                    let again = parse_row(line).and_then(|p| p.evaluate());
                    !matches!(again, Ok(r) if r.csv() == *line)
                })
                .count() as f64
        })
        .unwrap_or(f64::NAN);
    rows.push(OracleReport::new(
        "sweep rows not reproduced after CSV round trip",
        mismatched,
        0.0,
        0.0,
        Measure::Absolute,
        format!("{} rows", grid.len()),
    ));
    rows
}

pub fn parse_pinned(text: &str) -> CliResult<HashMap<(String, String), f64>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        // The quantity may contain commas; group and value are unambiguous.
        let (group, rest) = line
            .split_once(',')
            .ok_or_else(|| CliError::validation(format!("pinned table line {}: malformed", i + 1)))?;
        let (quantity, value) = rest
            .rsplit_once(',')
            .ok_or_else(|| CliError::validation(format!("pinned table line {}: malformed", i + 1)))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::validation(format!("pinned table line {}: bad value '{value}'", i + 1)))?;
        map.insert((group.to_string(), unquote(quantity)), value);
    }
    Ok(map)
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn unquote(s: &str) -> String {
    match s.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        Some(inner) => inner.replace("\"\"", "\""),
        None => s.to_string(),
    }
}

/// Runs the selected groups (all when `groups` is empty) in table order.
pub fn run(groups: &[String], pinned: &HashMap<(String, String), f64>, progress: bool) -> CliResult<Vec<VerifiedRow>> {
    for g in groups {
        if !group_names().contains(&g.as_str()) {
            return Err(CliError::validation(format!(
                "unknown regression group '{g}' (expected one of {})",
                group_names().join(", ")
            )));
        }
    }
    let selected = |name: &str| groups.is_empty() || groups.iter().any(|g| g == name);
    let mut out = Vec::new();
    let mut push = |group: &str, reports: Vec<OracleReport>| {
        for report in reports {
            let pinned = pinned.get(&(group.to_string(), report.quantity.clone())).copied();
            out.push(VerifiedRow {
                group: group.to_string(),
                report,
                pinned,
            });
        }
    };
    for case in regression_table() {
        if selected(case.name) {
            let start = std::time::Instant::now();
            push(case.name, (case.run)());
            if progress {
                eprintln!("verify: {} done in {:.1} s", case.name, start.elapsed().as_secs_f64());
            }
        }
    }
    if selected("cli") {
        push("cli", cli_rows());
    }
    Ok(out)
}

pub const REPORT_HEADER: &str = "group,quantity,production,oracle,deviation,tolerance,measure,resolution,pinned_production,status";

pub fn render_report(rows: &[VerifiedRow]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in rows {
        let rep = &r.report;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.group,
            quote(&rep.quantity),
            float(rep.production),
            float(rep.oracle),
            float(rep.deviation),
            float(rep.tolerance),
            rep.measure.label(),
            quote(&rep.resolution),
            r.pinned.map(float).unwrap_or_default(),
            r.status()
        ));
    }
    s
}

pub fn render_pinned(rows: &[VerifiedRow]) -> String {
    let mut s = String::from(PINNED_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.group, quote(&r.report.quantity), float(r.report.production)));
    }
    s
}
