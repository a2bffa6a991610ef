//! One evaluation point and its CSV row.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use decoherence::{
    decoherence_probability_ribbon_sweep, decoherence_probability_with, BeamParameters, HalfPlaneOptions, LengthUnit,
    PathPairGeometry, RibbonGeometry, RibbonOptions, ThermalState,
};

use crate::error::{CliError, CliResult};

pub const HALFPLANE_REL_TOL: f64 = 1e-9;
pub const RIBBON_REL_TOL: f64 = 1e-3;
pub const RIBBON_PANELS: usize = 200;
pub const RIBBON_MAX_LEVEL: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    HalfPlane,
    Ribbon,
}

impl Geometry {
    pub fn label(self) -> &'static str {
        match self {
            Geometry::HalfPlane => "halfplane",
            Geometry::Ribbon => "ribbon",
        }
    }
}

impl FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "halfplane" | "half-plane" => Ok(Geometry::HalfPlane),
            "ribbon" => Ok(Geometry::Ribbon),
            other => Err(format!("unknown geometry '{other}' (expected halfplane or ribbon)")),
        }
    }
}

/// Bath temperature as entered: the literal "zero" or kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Kelvin(f64),
}

impl Temperature {
    pub fn state(self) -> CliResult<ThermalState> {
        match self {
            Temperature::Zero => Ok(ThermalState::zero()),
            Temperature::Kelvin(t) => Ok(ThermalState::from_kelvin(t)?),
        }
    }
}

impl FromStr for Temperature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("zero") {
            return Ok(Temperature::Zero);
        }
        s.parse::<f64>()
            .map(Temperature::Kelvin)
            .map_err(|_| format!("temperature '{s}' is neither \"zero\" nor a number of kelvin"))
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Zero => f.write_str("zero"),
            Temperature::Kelvin(t) => write!(f, "{}", float(*t)),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub geometry: Geometry,
    pub unit: LengthUnit,
    pub d1: f64,
    pub d2: f64,
    pub d_perp: f64,
    pub beta: f64,
    pub temperature: Temperature,
    /// Ribbon width in meters.
    pub width: Option<f64>,
    pub panels: Option<usize>,
    pub rel_tol: f64,
    pub max_level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: Point,
    pub p: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub wall_time: f64,
}

pub const HEADER: &str =
    "geometry,unit,d1,d2,d_perp,beta,temperature,width,panels,rel_tol,max_level,P,error_estimate,evaluations";

impl ResultRow {
    /// The deterministic part of the row; wall time is reported separately.
    pub fn csv(&self) -> String {
        let p = &self.point;
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.geometry.label(),
            p.unit.label(),
            float(p.d1),
            float(p.d2),
            float(p.d_perp),
            float(p.beta),
            p.temperature,
            opt(p.width.map(float)),
            opt(p.panels.map(|n| n.to_string())),
            float(p.rel_tol),
            opt(p.max_level.map(|n| n.to_string())),
            float(self.p),
            float(self.error_estimate),
            self.evaluations
        )
    }
}

/// Recovers the input point from an emitted CSV line.
pub fn parse_row(line: &str) -> CliResult<Point> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != HEADER.split(',').count() {
        return Err(CliError::validation(format!("row has {} fields: {line}", f.len())));
    }
    let num = |i: usize| -> CliResult<f64> {
        f[i].parse::<f64>()
            .map_err(|_| CliError::validation(format!("field {i} '{}' is not a number", f[i])))
    };
    let opt_num = |i: usize| -> CliResult<Option<f64>> { if f[i].is_empty() { Ok(None) } else { num(i).map(Some) } };
    let opt_int = |i: usize| -> CliResult<Option<u64>> {
        if f[i].is_empty() {
            Ok(None)
        } else {
            f[i].parse::<u64>()
                .map(Some)
                .map_err(|_| CliError::validation(format!("field {i} '{}' is not an integer", f[i])))
        }
    };
    Ok(Point {
        geometry: f[0].parse().map_err(CliError::Validation)?,
        unit: f[1].parse().map_err(CliError::Validation)?,
        d1: num(2)?,
        d2: num(3)?,
        d_perp: num(4)?,
        beta: num(5)?,
        temperature: f[6].parse().map_err(CliError::Validation)?,
        width: opt_num(7)?,
        panels: opt_int(8)?.map(|n| n as usize),
        rel_tol: num(9)?,
        max_level: opt_int(10)?.map(|n| n as u32),
    })
}

impl Point {
    /// Fills solver defaults and rejects inconsistent flag combinations.
    pub fn validated(mut self) -> CliResult<Self> {
        if !(self.rel_tol > 0.0) {
            return Err(CliError::validation(format!("--rel-tol must be > 0, got {}", self.rel_tol)));
        }
        match self.geometry {
            Geometry::HalfPlane => {
                for (flag, set) in [
                    ("--width", self.width.is_some()),
                    ("--panels", self.panels.is_some()),
                    ("--max-level", self.max_level.is_some()),
                ] {
                    if set {
                        return Err(CliError::validation(format!("{flag} applies only to --geometry ribbon")));
                    }
                }
            }
            Geometry::Ribbon => {
                let w = self
                    .width
                    .ok_or_else(|| CliError::validation("--geometry ribbon requires --width (ribbon width in meters)"))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(CliError::validation(format!("--width must be finite and > 0, got {w}")));
                }
                self.panels.get_or_insert(RIBBON_PANELS);
                self.max_level.get_or_insert(RIBBON_MAX_LEVEL);
            }
        }
        Ok(self)
    }

    pub fn evaluate(&self) -> CliResult<ResultRow> {
        let point = self.validated()?;
        let start = Instant::now();
        let beam = BeamParameters::new(point.beta)?;
        let thermal = point.temperature.state()?;
        let geom = PathPairGeometry::new(point.d1, point.d2, point.d_perp, point.unit)?;
        let (p, error_estimate, evaluations, converged) = match point.geometry {
            Geometry::HalfPlane => {
                let e = decoherence_probability_with(&geom, &beam, &thermal, HalfPlaneOptions { rel_tol: point.rel_tol })?;
                (e.value, e.error_estimate, e.evaluations, true)
            }
            Geometry::Ribbon => {
                let width = point.width.unwrap_or_default();
                let scale = match point.unit {
                    LengthUnit::Meters => 1.0,
                    LengthUnit::RibbonWidth => width,
                    LengthUnit::ThermalWavelength if !thermal.is_zero() => thermal.lambda_t(),
                    LengthUnit::ThermalWavelength => {
                        return Err(CliError::validation("--unit lambda_T needs a finite --temperature"))
                    }
                };
                let mut meters = geom.scaled(scale);
                meters.unit = LengthUnit::Meters;
                let ribbon = RibbonGeometry::new(width, point.panels.unwrap_or(RIBBON_PANELS))?;
                let opts = RibbonOptions {
                    rel_tol: point.rel_tol,
                    max_level: point.max_level.unwrap_or(RIBBON_MAX_LEVEL),
                };
                let sweep = decoherence_probability_ribbon_sweep(&[meters], &[thermal], &beam, &ribbon, opts)?;
                let e = sweep.estimates[0][0];
                (e.value, e.error_estimate, sweep.solves, sweep.converged)
            }
        };
        Ok(ResultRow {
            point,
            p,
            error_estimate,
            evaluations,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}

/// Default relative tolerance for each geometry.
pub fn default_rel_tol(geometry: Geometry) -> f64 {
    match geometry {
        Geometry::HalfPlane => HALFPLANE_REL_TOL,
        Geometry::Ribbon => RIBBON_REL_TOL,
    }
}
