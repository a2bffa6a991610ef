//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 after reporting unless ACCEPTANCE_STRICT is set, in which case
//! any FAIL makes the process exit 1.

use std::process::Command;
use std::time::Instant;

use decoherence::{
    decoherence_high_temperature_closed, decoherence_probability, decoherence_probability_ribbon_sweep,
    decoherence_zero_temperature_closed, spectral_density_normalized, velocity_factor_f, BeamParameters, LengthUnit,
    PathPairGeometry, RibbonGeometry, RibbonOptions, RibbonSweep, ThermalState, VelocityFactorMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn beam(beta: f64) -> BeamParameters {
    BeamParameters::new(beta).unwrap()
}

fn meters(d1: f64, d2: f64, dp: f64) -> PathPairGeometry {
    PathPairGeometry::new(d1, d2, dp, LengthUnit::Meters).unwrap()
}

fn closed_vs_full() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &r in &[1.1, 2.0, 5.0, 10.0, 100.0] {
        for &b in &[0.3, 0.5, 0.7, 0.9] {
            let g = meters(1.0, r, 0.0);
            let full = decoherence_probability(&g, &beam(b), &ThermalState::zero()).unwrap_or(f64::NAN);
            let closed = decoherence_zero_temperature_closed(&g, &beam(b)).unwrap();
            worst = worst.max(rel(full, closed));
        }
    }
    let t = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && t <= 10.0,
        format!("max relative deviation {worst:.2e} (tol 1e-6), {t:.2} s (limit 10 s)"),
    )
}

fn velocity_factor() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut betas: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    betas.push(0.99);
    for &b in &betas {
        let c = velocity_factor_f(&beam(b), VelocityFactorMethod::ClosedForm).unwrap();
        let q = velocity_factor_f(&beam(b), VelocityFactorMethod::Quadrature).unwrap();
        worst = worst.max(rel(q, c));
    }
    let f = |b: f64| velocity_factor_f(&beam(b), VelocityFactorMethod::ClosedForm).unwrap();
    let small = f(1e-8);
    let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    let monotone = grid.windows(2).all(|w| f(w[1]) > f(w[0]));
    let t = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && small < 1e-6 && monotone && t <= 5.0,
        format!("max deviation {worst:.2e} (tol 1e-9), f(1e-8) = {small:.2e}, monotone {monotone}, {t:.2} s (limit 5 s)"),
    )
}

fn high_temperature() -> Outcome {
    let start = Instant::now();
    let thermal = ThermalState::from_wavelength(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for &d2 in &[60.0, 100.0, 200.0] {
        let g = PathPairGeometry::new(50.0, d2, 0.0, LengthUnit::ThermalWavelength).unwrap();
        let full = decoherence_probability(&g, &beam(0.5), &thermal).unwrap_or(f64::NAN);
        let closed = decoherence_high_temperature_closed(&g, &beam(0.5), &thermal).unwrap();
        worst = worst.max(rel(full, closed));
    }
    let t = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-2 && t <= 30.0,
        format!("max relative deviation {worst:.2e} (tol 1e-2), {t:.2} s (limit 30 s)"),
    )
}

fn prefactor_limit() -> Outcome {
    let at_small = beam(1e-4).velocity_prefactor();
    let inside = (1..=1000)
        .map(|i| i as f64 / 1001.0)
        .all(|b| (0.5..1.0).contains(&beam(b).velocity_prefactor()));
    outcome(
        (at_small - 0.5).abs() <= 1e-6 && inside,
        format!("value at 1e-4 is {at_small:.10} (0.5 within 1e-6), all 1000 samples in [0.5, 1): {inside}"),
    )
}

fn spectral_slope() -> Outcome {
    let start = Instant::now();
    let g = meters(1.0, 1e4, 0.0);
    let pts: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let w = 10f64.powf(-4.0 + 2.0 * i as f64 / 20.0);
            let s = spectral_density_normalized(&g, &beam(0.9), &ThermalState::zero(), w).unwrap();
            (w.ln(), s.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let t = start.elapsed().as_secs_f64();
    outcome(
        (slope + 1.0).abs() <= 0.05 && t <= 10.0,
        format!("log-log slope {slope:.4} over 21 points (target -1.00 +/- 0.05), {t:.2} s (limit 10 s)"),
    )
}

fn symmetry_positivity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let mut log = |lo: f64, hi: f64| -> f64 { rng.gen_range(lo.ln()..hi.ln()).exp() };
    let mut failures = Vec::new();
    let mut worst_sym: f64 = 0.0;
    for i in 0..500 {
        let b = beam(log(0.05, 0.99));
        let temperature = log(1.0, 1000.0);
        let thermal = ThermalState::from_kelvin(temperature).unwrap();
        let lt = thermal.lambda_t();
        let d1 = log(1e-2, 1e2) * lt;
        let d2 = log(1e-2, 1e2) * lt;
        let dp = if i % 2 == 0 { 0.0 } else { log(1e-2, 1e1) * lt };
        let g = meters(d1, d2, dp);
        let p = decoherence_probability(&g, &b, &thermal);
        let q = decoherence_probability(&g.swapped(), &b, &thermal);
        let warm = decoherence_probability(&g, &b, &thermal.doubled());
        let same = decoherence_probability(&meters(d1, d1, 0.0), &b, &thermal);
        match (p, q, warm, same) {
            (Ok(p), Ok(q), Ok(w), Ok(s)) => {
                worst_sym = worst_sym.max(rel(q, p));
                if !(p >= 0.0 && rel(q, p) <= 1e-10 && s == 0.0 && w >= p) {
                    failures.push(format!("half-plane set {i}"));
                }
            }
            _ => failures.push(format!("half-plane set {i} errored")),
        }
    }
    let opts = RibbonOptions {
        rel_tol: 1e-2,
        max_level: 0,
    };
    for i in 0..500 {
        let b = beam(log(0.05, 0.95));
        let w = log(1e-4, 1e-1);
        let ribbon = RibbonGeometry::new(w, 6).unwrap();
        let thermal = ThermalState::from_wavelength(w / log(0.05, 5.0)).unwrap();
        let base = if i % 3 == 0 { ThermalState::zero() } else { thermal };
        let (d1, d2) = (log(1e-2, 3.0) * w, log(1e-2, 3.0) * w);
        let g = meters(d1, d2, 0.0);
        let s = decoherence_probability_ribbon_sweep(
            &[g, g.swapped(), meters(d1, d1, 0.0)],
            &[base, base.doubled(), thermal],
            &b,
            &ribbon,
            opts,
        );
        match s {
            Ok(s) => {
                let e = &s.estimates;
                let sym = rel(e[1][0].value, e[0][0].value);
                worst_sym = worst_sym.max(sym);
                let ok = e[0][0].value >= 0.0
                    && sym <= 1e-10
                    && e[2].iter().all(|x| x.value == 0.0)
                    && e[0][1].value >= e[0][0].value;
                if !ok {
                    failures.push(format!("ribbon set {i}"));
                }
            }
            Err(err) => failures.push(format!("ribbon set {i}: {err}")),
        }
    }
    let t = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && t <= 120.0,
        format!(
            "1000 sets (500 half-plane, 500 ribbon N=6): {} violations{}, worst exchange asymmetry {worst_sym:.1e}, {t:.1} s (limit 120 s)",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn scale_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(d1, d2, dp, b) in &[(1.0, 10.0, 0.0, 0.5), (2.0, 3.0, 0.5, 0.9), (1.0, 1e3, 7.0, 0.3), (5.0, 1.0, 20.0, 0.7)] {
        let g = meters(d1, d2, dp);
        let p1 = decoherence_probability(&g, &beam(b), &ThermalState::zero()).unwrap_or(f64::NAN);
        for &s in &[1e-3, 1e3] {
            let ps = decoherence_probability(&g.scaled(s), &beam(b), &ThermalState::zero()).unwrap_or(f64::NAN);
            worst = worst.max(rel(ps, p1));
        }
    }
    outcome(worst <= 1e-8, format!("max relative change {worst:.2e} over s in {{1e-3, 1, 1e3}} (tol 1e-8)"))
}

const FIG4_D: [f64; 6] = [1e-3, 3e-3, 1e-2, 1e-1, 1.0, 10.0];
const FIG4_SEPARATION: [f64; 2] = [0.01, 20.0];
const FIG4_WIDTH_OVER_LAMBDA: [f64; 3] = [0.0, 0.1, 1.0];
const WIDTH: f64 = 1e-3;
const FIG4_OPTIONS: RibbonOptions = RibbonOptions {
    rel_tol: 1e-3,
    max_level: 1,
};

fn fig4_thermals() -> Vec<ThermalState> {
    FIG4_WIDTH_OVER_LAMBDA
        .iter()
        .map(|&r| if r == 0.0 { ThermalState::zero() } else { ThermalState::from_wavelength(WIDTH / r).unwrap() })
        .collect()
}

fn fig4_paths(separation: f64) -> Vec<PathPairGeometry> {
    FIG4_D.iter().map(|&d| meters(d * WIDTH, (d + separation) * WIDTH, 0.0)).collect()
}

/// Fig. 4 sweeps at one panel count, indexed like FIG4_SEPARATION.
fn fig4_sweeps(panels: usize) -> (Vec<Result<RibbonSweep, String>>, f64) {
    let start = Instant::now();
    let ribbon = RibbonGeometry::new(WIDTH, panels).unwrap();
    let sweeps = FIG4_SEPARATION
        .iter()
        .map(|&sep| {
            decoherence_probability_ribbon_sweep(&fig4_paths(sep), &fig4_thermals(), &beam(0.5), &ribbon, FIG4_OPTIONS)
                .map_err(|e| e.to_string())
        })
        .collect();
    (sweeps, start.elapsed().as_secs_f64())
}

fn half_plane_limit(n400: &[Result<RibbonSweep, String>], t400: f64) -> Outcome {
    let sweep = match &n400[1] {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("ribbon sweep failed: {e}")),
    };
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &d) in FIG4_D.iter().enumerate().take(3) {
        let g = meters(d * WIDTH, (d + 20.0) * WIDTH, 0.0);
        let closed = decoherence_zero_temperature_closed(&g, &beam(0.5)).unwrap();
        let r = rel(sweep.estimates[i][0].value, closed);
        worst = worst.max(r);
        parts.push(format!("d={d}W: P/closed = {:.4}", sweep.estimates[i][0].value / closed));
    }
    // the shared sweep covers both D values; half its time is attributed here
    let t = 0.5 * t400;
    outcome(
        worst <= 0.02 && t <= 600.0,
        format!("N=400, D=20W, T=0: {} (tol 2%), ~{t:.0} s (limit 600 s)", parts.join(", ")),
    )
}

fn self_convergence(n200: &[Result<RibbonSweep, String>], n400: &[Result<RibbonSweep, String>]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let mut residual: f64 = 0.0;
    for (k, &sep) in FIG4_SEPARATION.iter().enumerate() {
        let (a, b) = match (&n200[k], &n400[k]) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("ribbon sweep failed: {e}")),
        };
        residual = residual.max(a.max_residual).max(b.max_residual);
        for (i, &d) in FIG4_D.iter().enumerate() {
            for (t, &wl) in FIG4_WIDTH_OVER_LAMBDA.iter().enumerate() {
                let r = rel(a.estimates[i][t].value, b.estimates[i][t].value);
                if r > worst {
                    worst = r;
                    worst_at = format!("D={sep}W, d={d}W, W/lambda_T={wl}");
                }
            }
        }
    }
    outcome(
        worst <= 5e-3 && residual <= 1e-8,
        format!("max |P400-P200|/P400 = {worst:.3e} at {worst_at} (tol 5e-3), max residual {residual:.1e} (tol 1e-8)"),
    )
}

fn far_falloff() -> Outcome {
    let start = Instant::now();
    let ds = [2.0, 4.0, 8.0, 16.0];
    let ribbon = RibbonGeometry::new(WIDTH, 100).unwrap();
    let paths: Vec<PathPairGeometry> = ds.iter().map(|&d| meters(d * WIDTH, (d + 1.0) * WIDTH, 0.0)).collect();
    let thermals = [ThermalState::zero(), ThermalState::from_wavelength(WIDTH).unwrap()];
    let sweep = match decoherence_probability_ribbon_sweep(&paths, &thermals, &beam(0.5), &ribbon, FIG4_OPTIONS) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("ribbon sweep failed: {e}")),
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, label) in [(0, "T=0"), (1, "W=lambda_T")] {
        let p: Vec<f64> = (0..ds.len()).map(|i| sweep.estimates[i][t].value).collect();
        let ratios: Vec<f64> = p.windows(2).map(|w| w[1] / w[0]).collect();
        // a power law keeps the ratio fixed; exponential decay drives it down
        let shrinking = ratios.windows(2).all(|w| w[1] < w[0]) && ratios[2] <= 0.5 * ratios[0];
        ok &= shrinking;
        parts.push(format!(
            "{label}: P(2d)/P(d) = {}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }
    let t = start.elapsed().as_secs_f64();
    outcome(
        ok,
        format!(
            "d = 2W..16W, D = W, N=100: {} (need strictly falling ratios, last <= half the first), {t:.0} s",
            parts.join("; ")
        ),
    )
}

fn oracle_regression(dir: &std::path::Path) -> Outcome {
    let start = Instant::now();
    let report = dir.join("oracle_report.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_decoherence"))
        .args(["verify", "--output", report.to_str().unwrap()])
        .env("DECOHERENCE_WORKERS", "1")
        .env("RAYON_NUM_THREADS", "1")
        .output();
    let t = start.elapsed().as_secs_f64();
    let out = match out {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("could not run verify: {e}")),
    };
    let text = std::fs::read_to_string(&report).unwrap_or_default();
    let rows = text.lines().count().saturating_sub(1);
    let bad: Vec<String> = text
        .lines()
        .skip(1)
        .filter(|l| !l.ends_with(",PASS"))
        .map(|l| {
            let f: Vec<&str> = l.splitn(3, ',').collect();
            format!("{}/{}", f[0], f.get(1).unwrap_or(&""))
        })
        .collect();
    outcome(
        out.status.code() == Some(0) && t <= 900.0,
        format!(
            "verify exit {:?}, {rows} rows, {} outside tolerance{}, {t:.0} s (limit 900 s)",
            out.status.code(),
            bad.len(),
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }
        ),
    )
}

const DETERMINISM_HALFPLANE: &str = r#"
[geometry]
kind = "halfplane"
unit = "m"
d1 = { start = 1e-6, stop = 1e-3, count = 4, spacing = "log" }
d2 = [2e-6, 5e-4]
d_perp = [0.0, 3e-6]

[beam]
beta = [0.2, 0.9]

[thermal]
temperature = ["zero", 4.0, 300.0]
"#;

const DETERMINISM_RIBBON: &str = r#"
[geometry]
kind = "ribbon"
unit = "W"
width = 1e-3
d = [0.01, 0.5]
separation = [0.1, 2.0]

[beam]
beta = 0.5

[thermal]
temperature = ["zero", 10.0]

[solver]
panels = 8
rel_tol = 1e-2
max_level = 1
"#;

fn determinism(dir: &std::path::Path) -> Outcome {
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let counts = [1usize, 4, max];
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, text) in [("halfplane", DETERMINISM_HALFPLANE), ("ribbon", DETERMINISM_RIBBON)] {
        let cfg = dir.join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let mut outputs = Vec::new();
        let mut codes = Vec::new();
        for &w in &counts {
            let out = dir.join(format!("{name}_{w}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_decoherence"))
                .args(["sweep", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()])
                .env("DECOHERENCE_WORKERS", w.to_string())
                .status();
            let bytes = std::fs::read(&out).unwrap_or_default();
            let code = status.ok().and_then(|s| s.code());
            ok &= code == Some(0) && !bytes.is_empty();
            codes.push(code.unwrap_or(-1));
            outputs.push(bytes);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        let rows = String::from_utf8_lossy(&outputs[0]).lines().count().saturating_sub(1);
        detail.push(format!("{name} {rows} rows identical: {same}, exit codes {codes:?}"));
    }
    outcome(ok, format!("workers {counts:?}: {}", detail.join(", ")))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, id, o.detail);
        results.push((id, name, o));
    };
    report(1, "closed form vs full integral at T=0", closed_vs_full());
    report(2, "velocity factor closed form vs quadrature", velocity_factor());
    report(3, "high-temperature asymptote", high_temperature());
    report(4, "high-temperature prefactor limit", prefactor_limit());
    report(5, "spectral divergence slope", spectral_slope());
    report(6, "symmetry, positivity, coincidence, warming", symmetry_positivity());
    report(7, "scale invariance at T=0", scale_invariance());
    let (n200, _) = fig4_sweeps(200);
    let (n400, t400) = fig4_sweeps(400);
    report(8, "ribbon to half-plane limit", half_plane_limit(&n400, t400));
    report(9, "BEM self-convergence", self_convergence(&n200, &n400));
    report(10, "ribbon far-distance falloff", far_falloff());
    report(11, "oracle regression", oracle_regression(dir.path()));
    report(12, "sweep determinism across worker counts", determinism(dir.path()));

    let passed = results.iter().filter(|r| r.2.passed).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
