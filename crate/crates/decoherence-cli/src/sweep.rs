//! Sweep configs: a Cartesian grid over the declared axes, evaluated on a
//! worker pool and written in declaration order.

use std::path::{Path, PathBuf};

use decoherence::LengthUnit;
use rayon::prelude::*;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::point::{default_rel_tol, float, Geometry, Point, ResultRow, Temperature, HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    D1,
    D2,
    DPerp,
    D,
    Separation,
    Width,
    Beta,
    Temperature,
    Panels,
}

impl Axis {
    fn lookup(section: &str, key: &str) -> Option<Axis> {
        Some(match (section, key) {
            ("geometry", "d1") => Axis::D1,
            ("geometry", "d2") => Axis::D2,
            ("geometry", "d_perp") => Axis::DPerp,
            ("geometry", "d") => Axis::D,
            ("geometry", "separation") => Axis::Separation,
            ("geometry", "width") => Axis::Width,
            ("beam", "beta") => Axis::Beta,
            ("thermal", "temperature") => Axis::Temperature,
            ("solver", "panels") => Axis::Panels,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Number(f64),
    Temperature(Temperature),
}

impl AxisValue {
    fn number(self) -> f64 {
        match self {
            AxisValue::Number(x) => x,
            AxisValue::Temperature(_) => f64::NAN,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub geometry: Geometry,
    pub unit: LengthUnit,
    /// Axes in declaration order; the first varies slowest.
    pub axes: Vec<(Axis, Vec<AxisValue>)>,
    pub rel_tol: f64,
    pub max_level: Option<u32>,
    pub output: Option<PathBuf>,
}

/// Locates `key` inside `[section]` for diagnostics; 1-based.
fn line_of(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if key.is_none() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if let Some(k) = key {
            if current == section {
                if let Some(rest) = line.strip_prefix(k) {
                    if rest.trim_start().starts_with('=') {
                        return Some(i + 1);
                    }
                }
            }
        }
    }
    None
}

struct Diagnostics<'a> {
    text: &'a str,
    origin: String,
}

impl Diagnostics<'_> {
    fn at(&self, section: &str, key: Option<&str>, msg: impl std::fmt::Display) -> CliError {
        let field = match key {
            Some(k) => format!("{section}.{k}"),
            None => format!("[{section}]"),
        };
        match line_of(self.text, section, key) {
            Some(line) => CliError::validation(format!("{}:{line}: field {field}: {msg}", self.origin)),
            None => CliError::validation(format!("{}: field {field}: {msg}", self.origin)),
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(n) => Some(*n as f64),
        _ => None,
    }
}

/// Expands a scalar, a list or a `{ start, stop, count, spacing }` range.
fn expand_range(t: &Table) -> Result<Vec<f64>, String> {
    for key in t.keys() {
        if !["start", "stop", "count", "spacing"].contains(&key.as_str()) {
            return Err(format!("unknown range key '{key}'"));
        }
    }
    let get = |k: &str| t.get(k).and_then(number).ok_or_else(|| format!("range needs numeric '{k}'"));
    let (start, stop) = (get("start")?, get("stop")?);
    let count = match t.get("count") {
        Some(Value::Integer(n)) if *n >= 1 => *n as usize,
        Some(_) => return Err("range 'count' must be an integer ≥ 1".into()),
        None => return Err("range needs 'count'".into()),
    };
    let spacing = match t.get("spacing") {
        None => "linear",
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err("range 'spacing' must be \"linear\" or \"log\"".into()),
    };
    match spacing {
        "linear" => Ok(linear_grid(start, stop, count)),
        "log" if start > 0.0 && stop > 0.0 => Ok(log_grid(start, stop, count)),
        "log" => Err("log spacing needs start and stop > 0".into()),
        other => Err(format!("unknown spacing '{other}' (expected linear or log)")),
    }
}

pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                start + (stop - start) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Endpoints are reproduced exactly.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (start.ln(), stop.ln());
    (0..count)
        .map(|i| match i {
            0 => start,
            _ if i == count - 1 => stop,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

fn axis_values(axis: Axis, v: &Value) -> Result<Vec<AxisValue>, String> {
    let one = |v: &Value| -> Result<AxisValue, String> {
        if axis == Axis::Temperature {
            return match v {
                Value::String(s) => s.parse::<Temperature>().map(AxisValue::Temperature),
                other => number(other)
                    .map(|t| AxisValue::Temperature(Temperature::Kelvin(t)))
                    .ok_or_else(|| "temperature must be \"zero\" or kelvin".to_string()),
            };
        }
        if axis == Axis::Panels {
            return match v {
                Value::Integer(n) if *n >= 1 => Ok(AxisValue::Number(*n as f64)),
                _ => Err("panel counts must be integers ≥ 1".into()),
            };
        }
        number(v).map(AxisValue::Number).ok_or_else(|| "expected a number".to_string())
    };
    let values = match v {
        Value::Array(items) => items.iter().map(one).collect::<Result<Vec<_>, _>>()?,
        Value::Table(t) if axis != Axis::Temperature && axis != Axis::Panels => {
            expand_range(t)?.into_iter().map(AxisValue::Number).collect()
        }
        scalar => vec![one(scalar)?],
    };
    if values.is_empty() {
        return Err("range is empty".into());
    }
    Ok(values)
}

impl SweepConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let diag = Diagnostics {
            text,
            origin: origin.to_string(),
        };
        let doc: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::validation(format!("{origin}: {e}")))?;

        let mut geometry = None;
        let mut unit = None;
        let mut axes: Vec<(Axis, Vec<AxisValue>)> = Vec::new();
        let mut rel_tol = None;
        let mut max_level = None;
        let mut output = None;

        for (section, body) in &doc {
            let table = match body {
                Value::Table(t) => t,
                _ => return Err(diag.at(section, None, "expected a [section]")),
            };
            if !["geometry", "beam", "thermal", "solver", "output"].contains(&section.as_str()) {
                return Err(diag.at(section, None, "unknown section"));
            }
            for (key, value) in table {
                let err = |msg: String| diag.at(section, Some(key), msg);
                match (section.as_str(), key.as_str()) {
                    ("geometry", "kind") => {
                        let s = value.as_str().ok_or_else(|| err("expected a string".into()))?;
                        geometry = Some(s.parse::<Geometry>().map_err(err)?);
                    }
                    ("geometry", "unit") => {
                        let s = value.as_str().ok_or_else(|| err("expected a string".into()))?;
                        unit = Some(s.parse::<LengthUnit>().map_err(err)?);
                    }
                    ("solver", "rel_tol") => {
                        let t = number(value).ok_or_else(|| err("expected a number".into()))?;
                        if !(t > 0.0) {
                            return Err(err(format!("tolerance must be > 0, got {t}")));
                        }
                        rel_tol = Some(t);
                    }
                    ("solver", "max_level") => match value {
                        Value::Integer(n) if *n >= 0 => max_level = Some(*n as u32),
                        _ => return Err(err("expected an integer ≥ 0".into())),
                    },
                    ("output", "path") => {
                        let s = value.as_str().ok_or_else(|| err("expected a string".into()))?;
                        output = Some(PathBuf::from(s));
                    }
                    (s, k) => {
                        let axis = Axis::lookup(s, k).ok_or_else(|| err("unknown field".into()))?;
                        axes.push((axis, axis_values(axis, value).map_err(err)?));
                    }
                }
            }
        }

        let geometry = geometry.ok_or_else(|| diag.at("geometry", Some("kind"), "missing (halfplane or ribbon)"))?;
        let unit = unit.ok_or_else(|| diag.at("geometry", Some("unit"), "missing (lambda_T, m or W)"))?;
        let has = |a: Axis| axes.iter().any(|(x, _)| *x == a);
        let pairwise = has(Axis::D1) || has(Axis::D2);
        let offset = has(Axis::D) || has(Axis::Separation);
        if pairwise && offset {
            return Err(diag.at("geometry", None, "give either d1/d2 or d/separation, not both"));
        }
        let required: &[(Axis, &str)] = if offset {
            &[(Axis::D, "d"), (Axis::Separation, "separation")]
        } else {
            &[(Axis::D1, "d1"), (Axis::D2, "d2")]
        };
        for (axis, name) in required {
            if !has(*axis) {
                return Err(diag.at("geometry", Some(name), "missing"));
            }
        }
        if !has(Axis::Beta) {
            return Err(diag.at("beam", Some("beta"), "missing"));
        }
        if !has(Axis::Temperature) {
            return Err(diag.at("thermal", Some("temperature"), "missing"));
        }
        match geometry {
            Geometry::Ribbon if !has(Axis::Width) => {
                return Err(diag.at("geometry", Some("width"), "ribbon sweeps require width (meters)"))
            }
            Geometry::HalfPlane if has(Axis::Width) || has(Axis::Panels) || max_level.is_some() => {
                return Err(diag.at("geometry", None, "width, panels and max_level apply only to the ribbon"))
            }
            _ => {}
        }
        Ok(Self {
            geometry,
            unit,
            axes,
            rel_tol: rel_tol.unwrap_or_else(|| default_rel_tol(geometry)),
            max_level,
            output,
        })
    }

    /// Grid points in lexicographic order over the declared axes.
    pub fn points(&self) -> Vec<Point> {
        let total: usize = self.axes.iter().map(|(_, v)| v.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut index = vec![0usize; self.axes.len()];
        for _ in 0..total {
            let mut p = Point {
                geometry: self.geometry,
                unit: self.unit,
                d1: f64::NAN,
                d2: f64::NAN,
                d_perp: 0.0,
                beta: f64::NAN,
                temperature: Temperature::Zero,
                width: None,
                panels: None,
                rel_tol: self.rel_tol,
                max_level: self.max_level,
            };
            let (mut d, mut separation) = (f64::NAN, f64::NAN);
            for (slot, (axis, values)) in self.axes.iter().enumerate() {
                let v = values[index[slot]];
                match axis {
                    Axis::D1 => p.d1 = v.number(),
                    Axis::D2 => p.d2 = v.number(),
                    Axis::DPerp => p.d_perp = v.number(),
                    Axis::D => d = v.number(),
                    Axis::Separation => separation = v.number(),
                    Axis::Width => p.width = Some(v.number()),
                    Axis::Beta => p.beta = v.number(),
                    Axis::Panels => p.panels = Some(v.number() as usize),
                    Axis::Temperature => {
                        if let AxisValue::Temperature(t) = v {
                            p.temperature = t;
                        }
                    }
                }
            }
            if !d.is_nan() {
                p.d1 = d;
                p.d2 = d + separation;
            }
            out.push(p);
            for slot in (0..index.len()).rev() {
                index[slot] += 1;
                if index[slot] < self.axes[slot].1.len() {
                    break;
                }
                index[slot] = 0;
            }
        }
        out
    }
}

/// Worker count from `DECOHERENCE_WORKERS`, else the available parallelism.
pub fn worker_pool() -> CliResult<rayon::ThreadPool> {
    pool_of(None)
}

fn pool_of(workers: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    } else if let Ok(v) = std::env::var(crate::WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::validation(format!("{} must be an integer ≥ 1, got '{v}'", crate::WORKERS_ENV)))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::validation(format!("cannot start worker pool: {e}")))
}

/// Evaluates every point on the pool; the result order is the input order.
pub fn evaluate_all(points: &[Point]) -> CliResult<Vec<ResultRow>> {
    evaluate_with_workers(points, None)
}

/// As [`evaluate_all`] with an explicit worker count.
pub fn evaluate_with_workers(points: &[Point], workers: Option<usize>) -> CliResult<Vec<ResultRow>> {
    let pool = pool_of(workers)?;
    let results: Vec<CliResult<ResultRow>> = pool.install(|| points.par_iter().map(|p| p.evaluate()).collect());
    results.into_iter().collect()
}

pub fn render(rows: &[ResultRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 256);
    s.push_str(HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

pub fn render_timing(rows: &[ResultRow]) -> String {
    let mut s = String::from("row,wall_time_s\n");
    for (i, r) in rows.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, float(r.wall_time)));
    }
    s
}

/// Sidecar path holding wall times, so the main file stays reproducible.
pub fn timing_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".timing.csv");
    PathBuf::from(name)
}

pub fn run_sweep(config: &SweepConfig, output: &Path) -> CliResult<Vec<ResultRow>> {
    let rows = evaluate_all(&config.points())?;
    std::fs::write(output, render(&rows))?;
    std::fs::write(timing_path(output), render_timing(&rows))?;
    let stalled = rows.iter().filter(|r| !r.converged).count();
    if stalled > 0 {
        return Err(CliError::Numerical(format!(
            "{stalled} row(s) missed rel_tol at the finest quadrature level; see the error_estimate column"
        )));
    }
    Ok(rows)
}
