//! Figure data recipes. Each figure is described by a TOML file under
//! `figures/`; the CSV holds the x axis followed by one column per curve.

use std::fmt;
use std::str::FromStr;

use decoherence::{
    decoherence_high_temperature_closed, decoherence_probability, decoherence_probability_ribbon_sweep,
    decoherence_zero_temperature_closed, fringe_visibility, spectral_density_normalized, velocity_factor_f,
    BeamParameters, LengthUnit, PathPairGeometry, RibbonGeometry, RibbonOptions, ThermalState, VelocityFactorMethod,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::point::float;
use crate::sweep::{linear_grid, log_grid, worker_pool};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F2b,
    F2c,
    F3a,
    F3b,
    F3c,
    F3d,
    F3e,
    F4,
    S1b,
    S1c,
    S2,
    S3,
    S4b,
}

impl FigureId {
    pub const ALL: [FigureId; 13] = [
        FigureId::F2b,
        FigureId::F2c,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F3c,
        FigureId::F3d,
        FigureId::F3e,
        FigureId::F4,
        FigureId::S1b,
        FigureId::S1c,
        FigureId::S2,
        FigureId::S3,
        FigureId::S4b,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F3c => "3c",
            FigureId::F3d => "3d",
            FigureId::F3e => "3e",
            FigureId::F4 => "4",
            FigureId::S1b => "s1b",
            FigureId::S1c => "s1c",
            FigureId::S2 => "s2",
            FigureId::S3 => "s3",
            FigureId::S4b => "s4b",
        }
    }

    /// The recipe shipped with the binary.
    pub fn builtin_config(self) -> &'static str {
        match self {
            FigureId::F2b => include_str!("../figures/2b.toml"),
            FigureId::F2c => include_str!("../figures/2c.toml"),
            FigureId::F3a => include_str!("../figures/3a.toml"),
            FigureId::F3b => include_str!("../figures/3b.toml"),
            FigureId::F3c => include_str!("../figures/3c.toml"),
            FigureId::F3d => include_str!("../figures/3d.toml"),
            FigureId::F3e => include_str!("../figures/3e.toml"),
            FigureId::F4 => include_str!("../figures/4.toml"),
            FigureId::S1b => include_str!("../figures/s1b.toml"),
            FigureId::S1c => include_str!("../figures/s1c.toml"),
            FigureId::S2 => include_str!("../figures/s2.toml"),
            FigureId::S3 => include_str!("../figures/s3.toml"),
            FigureId::S4b => include_str!("../figures/s4b.toml"),
        }
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.label() == key)
            .ok_or_else(|| {
                let ids: Vec<&str> = FigureId::ALL.iter().map(|f| f.label()).collect();
                format!("unknown figure '{s}' (expected one of {})", ids.join(", "))
            })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
    /// Extra abscissae merged into the grid, e.g. an exact 1.
    #[serde(default)]
    pub include: Vec<f64>,
}

impl AxisSpec {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        if self.count == 0 {
            return Err(CliError::validation(format!("axis {} is empty", self.name)));
        }
        let mut v = match self.spacing {
            Spacing::Linear => linear_grid(self.start, self.stop, self.count),
            Spacing::Log if self.start > 0.0 && self.stop > 0.0 => log_grid(self.start, self.stop, self.count),
            Spacing::Log => return Err(CliError::validation(format!("axis {} needs positive log bounds", self.name))),
        };
        v.extend(&self.include);
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CutMode {
    /// Fixed d₁ per curve, x = d₂.
    FixedD1,
    /// d₂ = d₁ + offset per curve, x = d₁.
    Offset,
    /// d₁ = d₂ = d per curve, x = d_⊥/d.
    Lateral,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RibbonAxis {
    /// x = d/W, curves over D/W.
    Distance,
    /// x = D/W, curves over d/W.
    Separation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// dP/dΩ with Ω = ωd₁/c; `d1_over_lambda` switches on the bath.
    Spectral {
        beta: Vec<f64>,
        ratio: Vec<f64>,
        #[serde(default = "zero_list")]
        dperp: Vec<f64>,
        d1_over_lambda: Option<f64>,
    },
    /// Zero-temperature closed form against x = d₂/d₁.
    ClosedForm { beta: Vec<f64> },
    /// Full P over an x = d₁/λ_T by y = d₂/λ_T grid.
    Map { beta: f64, y: AxisSpec },
    Cut {
        beta: Vec<f64>,
        mode: CutMode,
        curves: Vec<f64>,
        thermal: bool,
    },
    /// λ_T P/d₁ against x = d₂/d₁: closed form plus full integrals.
    HighTemperature { beta: f64, d1_over_lambda: Vec<f64> },
    /// f(β) and (1 − 1/γ)/β² against x = β.
    Prefactors,
    Ribbon {
        vary: RibbonAxis,
        fixed: Vec<f64>,
        width_over_lambda: Vec<f64>,
        beta: f64,
        width: f64,
        panels: usize,
        rel_tol: f64,
        max_level: u32,
    },
    /// Fringe intensity against x = Δx/period.
    Fringes {
        probability: Vec<f64>,
        #[serde(default)]
        chi: f64,
    },
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, Deserialize)]
pub struct FigureConfig {
    pub id: String,
    pub title: String,
    pub normalization: String,
    /// True when grid extents were read off the plots by eye.
    pub approximate: bool,
    pub x: AxisSpec,
    #[serde(flatten)]
    pub recipe: Recipe,
}

impl FigureConfig {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("{origin}: {e}")))
    }
}

/// Tabulated figure data; `stalled` counts ribbon groups that missed rel_tol.
#[derive(Debug, Clone)]
pub struct FigureTable {
    pub x_name: String,
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub stalled: usize,
}

impl FigureTable {
    pub fn render(&self) -> String {
        let mut s = self.x_name.clone();
        for (name, _) in &self.columns {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            s.push_str(&float(*x));
            for (_, col) in &self.columns {
                s.push(',');
                s.push_str(&float(col[i]));
            }
            s.push('\n');
        }
        s
    }
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn halfplane_geometry(d1: f64, d2: f64, d_perp: f64, thermal: bool) -> CliResult<(PathPairGeometry, ThermalState)> {
    if thermal {
        Ok((
            PathPairGeometry::new(d1, d2, d_perp, LengthUnit::ThermalWavelength)?,
            ThermalState::from_wavelength(1.0)?,
        ))
    } else {
        Ok((PathPairGeometry::new(d1, d2, d_perp, LengthUnit::Meters)?, ThermalState::zero()))
    }
}

/// Evaluates `f(curve, x)` for every cell, in parallel, keeping the order.
fn tabulate<C: Sync>(
    x: &[f64],
    curves: &[C],
    f: impl Fn(&C, f64) -> CliResult<f64> + Sync,
) -> CliResult<Vec<Vec<f64>>> {
    let cells: Vec<(usize, usize)> = (0..curves.len()).flat_map(|c| (0..x.len()).map(move |i| (c, i))).collect();
    let values: Vec<CliResult<f64>> = cells.par_iter().map(|&(c, i)| f(&curves[c], x[i])).collect();
    let values: Vec<f64> = values.into_iter().collect::<CliResult<_>>()?;
    Ok(values.chunks(x.len().max(1)).map(|c| c.to_vec()).collect())
}

pub fn build(config: &FigureConfig) -> CliResult<FigureTable> {
    let x = config.x.values()?;
    let pool = worker_pool()?;
    let (columns, stalled) = pool.install(|| columns(&config.recipe, &x))?;
    Ok(FigureTable {
        x_name: config.x.name.clone(),
        x,
        columns,
        stalled,
    })
}

type Columns = Vec<(String, Vec<f64>)>;

fn named(names: Vec<String>, values: Vec<Vec<f64>>) -> Columns {
    names.into_iter().zip(values).collect()
}

fn columns(recipe: &Recipe, x: &[f64]) -> CliResult<(Columns, usize)> {
    match recipe {
        Recipe::Spectral {
            beta,
            ratio,
            dperp,
            d1_over_lambda,
        } => {
            let mut curves = Vec::new();
            for &b in beta {
                for &r in ratio {
                    for &p in dperp {
                        curves.push((b, r, p));
                    }
                }
            }
            let values = tabulate(x, &curves, |&(b, r, p), omega| {
                let beam = BeamParameters::new(b)?;
                let d1 = d1_over_lambda.unwrap_or(1.0);
                let (geom, thermal) = halfplane_geometry(d1, d1 * r, d1 * p, d1_over_lambda.is_some())?;
                Ok(spectral_density_normalized(&geom, &beam, &thermal, omega)?)
            })?;
            let names = curves
                .iter()
                .map(|(b, r, p)| format!("beta={};d2/d1={};dperp/d1={}", label(*b), label(*r), label(*p)))
                .collect();
            Ok((named(names, values), 0))
        }
        Recipe::ClosedForm { beta } => {
            let values = tabulate(x, beta, |&b, ratio| {
                let beam = BeamParameters::new(b)?;
                let geom = PathPairGeometry::new(1.0, ratio, 0.0, LengthUnit::Meters)?;
                Ok(decoherence_zero_temperature_closed(&geom, &beam)?)
            })?;
            let names = beta.iter().map(|b| format!("beta={}", label(*b))).collect();
            Ok((named(names, values), 0))
        }
        Recipe::Map { beta, y } => {
            let ys = y.values()?;
            let beam = BeamParameters::new(*beta)?;
            let values = tabulate(x, &ys, |&d2, d1| {
                let (geom, thermal) = halfplane_geometry(d1, d2, 0.0, true)?;
                Ok(decoherence_probability(&geom, &beam, &thermal)?)
            })?;
            let names = ys.iter().map(|v| format!("{}={}", y.name, label(*v))).collect();
            Ok((named(names, values), 0))
        }
        Recipe::Cut {
            beta,
            mode,
            curves,
            thermal,
        } => {
            let mut pairs = Vec::new();
            for &b in beta {
                for &c in curves {
                    pairs.push((b, c));
                }
            }
            let values = tabulate(x, &pairs, |&(b, c), x| {
                let beam = BeamParameters::new(b)?;
                let (d1, d2, dp) = match mode {
                    CutMode::FixedD1 => (c, x, 0.0),
                    CutMode::Offset => (x, x + c, 0.0),
                    CutMode::Lateral => (c, c, x * c),
                };
                let (geom, t) = halfplane_geometry(d1, d2, dp, *thermal)?;
                Ok(decoherence_probability(&geom, &beam, &t)?)
            })?;
            let unit = if *thermal { "lambda_T" } else { "d" };
            let key = match mode {
                CutMode::FixedD1 => format!("d1/{unit}"),
                CutMode::Offset => format!("(d2-d1)/{unit}"),
                CutMode::Lateral => format!("d/{unit}"),
            };
            let names = pairs
                .iter()
                .map(|(b, c)| format!("beta={};{key}={}", label(*b), label(*c)))
                .collect();
            Ok((named(names, values), 0))
        }
        Recipe::HighTemperature { beta, d1_over_lambda } => {
            let beam = BeamParameters::new(*beta)?;
            // Curve 0 is the closed form; the rest are full integrals.
            let mut curves = vec![None];
            curves.extend(d1_over_lambda.iter().map(|a| Some(*a)));
            let values = tabulate(x, &curves, |a, ratio| {
                let d1 = a.unwrap_or(1.0);
                let (geom, thermal) = halfplane_geometry(d1, d1 * ratio, 0.0, true)?;
                let p = match a {
                    None => decoherence_high_temperature_closed(&geom, &beam, &thermal)?,
                    Some(_) => decoherence_probability(&geom, &beam, &thermal)?,
                };
                Ok(p / d1)
            })?;
            let names = curves
                .iter()
                .map(|a| match a {
                    None => "closed_form".to_string(),
                    Some(a) => format!("full;d1/lambda_T={}", label(*a)),
                })
                .collect();
            Ok((named(names, values), 0))
        }
        Recipe::Prefactors => {
            let values = tabulate(x, &[0u8, 1u8], |&which, b| {
                let beam = BeamParameters::new(b)?;
                Ok(match which {
                    0 => velocity_factor_f(&beam, VelocityFactorMethod::ClosedForm)?,
                    _ => beam.velocity_prefactor(),
                })
            })?;
            Ok((
                named(vec!["f_zero_temperature".into(), "high_temperature".into()], values),
                0,
            ))
        }
        Recipe::Ribbon {
            vary,
            fixed,
            width_over_lambda,
            beta,
            width,
            panels,
            rel_tol,
            max_level,
        } => ribbon_columns(
            x,
            *vary,
            fixed,
            width_over_lambda,
            *beta,
            *width,
            *panels,
            RibbonOptions {
                rel_tol: *rel_tol,
                max_level: *max_level,
            },
        ),
        Recipe::Fringes { probability, chi } => {
            let values = probability
                .iter()
                .map(|&p| Ok(fringe_visibility(p, *chi, x, 1.0)?))
                .collect::<CliResult<Vec<_>>>()?;
            let names = probability.iter().map(|p| format!("P={}", label(*p))).collect();
            Ok((named(names, values), 0))
        }
    }
}

/// One shared-node ribbon sweep per fixed value, covering every abscissa
/// and temperature, plus the matching half-plane reference columns.
#[allow(clippy::too_many_arguments)]
fn ribbon_columns(
    x: &[f64],
    vary: RibbonAxis,
    fixed: &[f64],
    width_over_lambda: &[f64],
    beta: f64,
    width: f64,
    panels: usize,
    opts: RibbonOptions,
) -> CliResult<(Columns, usize)> {
    let beam = BeamParameters::new(beta)?;
    let ribbon = RibbonGeometry::new(width, panels)?;
    let thermals: Vec<ThermalState> = width_over_lambda
        .iter()
        .map(|&r| if r == 0.0 { Ok(ThermalState::zero()) } else { ThermalState::from_wavelength(width / r) })
        .collect::<decoherence::Result<_>>()?;
    let (fixed_key, pair) = match vary {
        RibbonAxis::Distance => ("D/W", (|x: f64, f: f64| (x, x + f)) as fn(f64, f64) -> (f64, f64)),
        RibbonAxis::Separation => ("d/W", (|x: f64, f: f64| (f, f + x)) as fn(f64, f64) -> (f64, f64)),
    };
    let mut out = Columns::new();
    let mut stalled = 0;
    for &f in fixed {
        let paths: Vec<PathPairGeometry> = x
            .iter()
            .map(|&xv| {
                let (d1, d2) = pair(xv, f);
                PathPairGeometry::new(d1 * width, d2 * width, 0.0, LengthUnit::Meters)
            })
            .collect::<decoherence::Result<_>>()?;
        let sweep = decoherence_probability_ribbon_sweep(&paths, &thermals, &beam, &ribbon, opts)?;
        if !sweep.converged {
            stalled += 1;
        }
        for (t, (thermal, r)) in thermals.iter().zip(width_over_lambda).enumerate() {
            let tag = format!("{fixed_key}={};W/lambda_T={}", label(f), label(*r));
            out.push((format!("ribbon[{tag}]"), sweep.estimates.iter().map(|e| e[t].value).collect()));
            let reference = paths
                .par_iter()
                .map(|g| {
                    Ok(if thermal.is_zero() {
                        decoherence_zero_temperature_closed(g, &beam)?
                    } else {
                        decoherence_probability(g, &beam, thermal)?
                    })
                })
                .collect::<CliResult<Vec<f64>>>()?;
            out.push((format!("halfplane[{tag}]"), reference));
        }
    }
    Ok((out, stalled))
}
