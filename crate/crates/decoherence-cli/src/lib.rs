//! Command-line surface for the decoherence engine: single points, sweeps,
//! figure data and the oracle regression run.

pub mod error;
pub mod figures;
pub mod point;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use decoherence::LengthUnit;

use crate::error::{CliError, CliResult};
use crate::figures::{FigureConfig, FigureId};
use crate::point::{default_rel_tol, Geometry, Point, Temperature, HEADER};
use crate::sweep::SweepConfig;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "DECOHERENCE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "decoherence", version, about = "Radiative decoherence of two-path electron beams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one point and print it as a CSV row.
    Compute(ComputeArgs),
    /// Evaluate the Cartesian grid of a TOML config.
    Sweep {
        config: PathBuf,
        /// Overrides `[output] path`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the data behind one figure.
    Figure {
        id: FigureId,
        /// Output file, `-` for stdout. Defaults to figure_<id>.csv.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Alternative recipe instead of the shipped one.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the oracle regression table.
    Verify {
        #[arg(long, default_value = "oracle_report.csv")]
        output: PathBuf,
        /// Restrict to the named groups (repeatable).
        #[arg(long = "group")]
        groups: Vec<String>,
        /// Pinned production values to compare against instead of the shipped table.
        #[arg(long)]
        pinned: Option<PathBuf>,
        /// Write the current production values as a new pinned table.
        #[arg(long)]
        write_pinned: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ComputeArgs {
    #[arg(long)]
    pub geometry: Geometry,
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub d2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dperp: f64,
    #[arg(long)]
    pub beta: f64,
    /// Kelvin, or "zero".
    #[arg(long, default_value = "zero")]
    pub temperature: Temperature,
    /// lambda_T, m or W.
    #[arg(long, default_value = "m")]
    pub unit: LengthUnit,
    /// Ribbon width in meters.
    #[arg(long)]
    pub width: Option<f64>,
    /// Ribbon panel count (default 200).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Ribbon quadrature refinements after the coarsest rule (default 2).
    #[arg(long)]
    pub max_level: Option<u32>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

impl ComputeArgs {
    pub fn point(&self) -> Point {
        Point {
            geometry: self.geometry,
            unit: self.unit,
            d1: self.d1,
            d2: self.d2,
            d_perp: self.dperp,
            beta: self.beta,
            temperature: self.temperature,
            width: self.width,
            panels: self.panels,
            rel_tol: self.rel_tol.unwrap_or_else(|| default_rel_tol(self.geometry)),
            max_level: self.max_level,
        }
    }
}

fn write_output(path: &Path, text: &str) -> CliResult<()> {
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
        Ok(())
    } else {
        std::fs::write(path, text)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
    }
}

fn compute(args: &ComputeArgs) -> CliResult<()> {
    let row = args.point().evaluate()?;
    println!("{HEADER}");
    println!("{}", row.csv());
    eprintln!("wall_time_s={:.6}", row.wall_time);
    if !row.converged {
        return Err(CliError::Numerical(format!(
            "ribbon quadrature missed rel_tol {:e} at the finest level (error estimate {:e})",
            row.point.rel_tol, row.error_estimate
        )));
    }
    Ok(())
}

fn sweep(config: &Path, output: Option<&Path>) -> CliResult<()> {
    let cfg = SweepConfig::load(config)?;
    let output = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::validation("no output path: set [output] path or pass --output"))?;
    let rows = sweep::run_sweep(&cfg, &output)?;
    eprintln!("wrote {} rows to {}", rows.len(), output.display());
    Ok(())
}

fn figure(id: FigureId, output: Option<&Path>, config: Option<&Path>) -> CliResult<()> {
    let cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
            FigureConfig::parse(&text, &path.display().to_string())?
        }
        None => FigureConfig::parse(id.builtin_config(), &format!("figures/{id}.toml"))?,
    };
    if cfg.id != id.label() {
        return Err(CliError::validation(format!("config describes figure {}, not {id}", cfg.id)));
    }
    let table = figures::build(&cfg)?;
    let default = PathBuf::from(format!("figure_{id}.csv"));
    let path = output.unwrap_or(&default);
    write_output(path, &table.render())?;
    eprintln!("figure {id}: {}", cfg.normalization);
    if cfg.approximate {
        eprintln!("figure {id}: grid extents are approximate; compare by shape");
    }
    if table.stalled > 0 {
        return Err(CliError::Numerical(format!(
            "{} ribbon sweep(s) missed rel_tol at the finest quadrature level",
            table.stalled
        )));
    }
    Ok(())
}

fn verify(output: &Path, groups: &[String], pinned: Option<&Path>, write_pinned: Option<&Path>) -> CliResult<()> {
    let pinned_text = match pinned {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", p.display())))?,
        None => verify::PINNED.to_string(),
    };
    let table = verify::parse_pinned(&pinned_text)?;
    let rows = verify::run(groups, &table, true)?;
    write_output(output, &verify::render_report(&rows))?;
    if let Some(path) = write_pinned {
        write_output(path, &verify::render_pinned(&rows))?;
    }
    let mut breaches = 0;
    for r in &rows {
        let status = if write_pinned.is_some() && r.report.passed() { "PASS" } else { r.status() };
        if status != "PASS" {
            breaches += 1;
            eprintln!(
                "{status} {}/{}: production {:e} oracle {:e} deviation {:e} tolerance {:e}",
                r.group, r.report.quantity, r.report.production, r.report.oracle, r.report.deviation, r.report.tolerance
            );
        }
    }
    eprintln!("verify: {} rows, {breaches} outside tolerance", rows.len());
    if breaches > 0 {
        return Err(CliError::Breach(breaches));
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Compute(args) => compute(args),
        Command::Sweep { config, output } => sweep(config, output.as_deref()),
        Command::Figure { id, output, config } => figure(*id, output.as_deref(), config.as_deref()),
        Command::Verify {
            output,
            groups,
            pinned,
            write_pinned,
        } => verify(output, groups, pinned.as_deref(), write_pinned.as_deref()),
    }
}

/// Parses and runs; returns the process exit code.
///
/// Help and version exit 0, malformed values 2, any other usage error 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => 2,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
