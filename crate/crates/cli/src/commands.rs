//! The five batch commands. Each returns its CSV (when it produces one),
//! a human-readable summary for stdout, and optionally a failure that the
//! caller reports after writing the partial output.

use std::fmt;

use effact::covariant::{self, PathGrid};
use effact::dynamics::{integrate_orbit_partial, OrbitState};
use effact::effective::{self, effective_model};
use effact::model::{validate_model, Function1D, ModelSpec};
use effact::reparam::{check_action_invariance, check_scalar, check_tensor, CoordinateMap};
use effact::tracelog::gamma1_compare;
use effact::Error;

use crate::config::{BumpConfig, ConfigError, GridConfig, MapConfig, OrbitConfig, RunConfig, SweepConfig};
use crate::output::{fmt_float, Csv};

/// Exit codes: 0 success, 1 configuration, 2 numeric domain, 3 internal.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                // malformed inputs count as configuration problems
                Error::Parse { .. }
                | Error::InvalidDomain { .. }
                | Error::InvalidHbar { .. }
                | Error::DerivativeOrder { .. }
                | Error::GridTooSmall { .. }
                | Error::NonPositiveStep { .. }
                | Error::NonPositiveHorizon { .. } => 1,
                Error::Internal { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub struct Outcome {
    pub csv: Option<String>,
    pub summary: String,
    /// Set when the command completed with a reportable condition; the
    /// partial CSV is still written before the process exits nonzero.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(csv: Option<String>, summary: String) -> Outcome {
        Outcome { csv, summary, failure: None }
    }
}

fn require<'a, T>(block: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    block
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{what}] section for this command")))
}

/// Relative error against a reference, with the convention that a zero
/// difference is zero even when the reference itself vanishes.
fn rel_or_zero(diff: f64, reference: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff.abs() / reference.abs()
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

pub fn cmd_eval(config: &RunConfig, spec: &ModelSpec) -> Result<Outcome, CliError> {
    let sweep: &SweepConfig = require(&config.sweep, "sweep")?;
    let eff = effective_model(spec)?;
    let mut csv = Csv::new(&["x", "m", "V", "gamma", "omega_sq", "V1", "Z1", "m_eff", "V_eff"]);
    let mut nan_cells = 0usize;
    let n = sweep.samples;
    let step = (sweep.hi - sweep.lo) / (n - 1) as f64;
    for i in 0..n {
        let x = if i + 1 == n { sweep.hi } else { sweep.lo + step * i as f64 };
        let m = spec.mass_at(x)?;
        let v = spec.potential_at(x)?;
        let gamma = covariant::christoffel(spec, x)?;
        let w = covariant::omega_sq(spec, x)?;
        let mut cells = vec![
            fmt_float(x),
            fmt_float(m),
            fmt_float(v),
            fmt_float(gamma),
            fmt_float(w),
        ];
        if w > 0.0 {
            cells.push(fmt_float(effective::v1(spec, x)?));
            cells.push(fmt_float(effective::z1(spec, x)?));
            cells.push(fmt_float(eff.mass_eff(x)?));
            cells.push(fmt_float(eff.potential_eff(x)?));
        } else {
            for _ in 0..4 {
                cells.push("nan".to_string());
            }
            nan_cells += 4;
        }
        csv.row(&cells);
    }
    csv.footer("nan_cells", &nan_cells.to_string());
    let summary =
        format!("eval: {n} rows, {nan_cells} cells outside the real-frequency region");
    Ok(Outcome::ok(Some(csv.finish()), summary))
}

// ---------------------------------------------------------------------------
// tracelog
// ---------------------------------------------------------------------------

pub fn cmd_tracelog(config: &RunConfig, spec: &ModelSpec) -> Result<Outcome, CliError> {
    let bump: &BumpConfig = require(&config.bump, "bump")?;
    let grid = config.grid;
    let omega0_sq = covariant::omega_sq(spec, bump.x0)?;
    if omega0_sq <= 0.0 {
        return Err(Error::NonPositiveFrequency { x: bump.x0, omega_sq: omega0_sq }.into());
    }

    let mut csv = Csv::new(&[
        "s",
        "max_epsilon",
        "gamma1_numeric",
        "gamma1_eigen",
        "gamma1_expansion",
        "gamma1_expansion_no_Z1",
        "rel_error",
        "rel_error_no_Z1",
    ]);
    let mut points = Vec::new();
    for (k, &scale) in bump.scales.iter().enumerate() {
        let amplitude = bump.amplitude_for(k);
        let path = bump_orbit(spec, bump.x0, amplitude, scale, grid)?;
        let cmp = gamma1_compare(spec, &path, omega0_sq)?;
        let rel = rel_or_zero(cmp.numeric_gy - cmp.expansion, cmp.numeric_gy);
        let rel_no = rel_or_zero(cmp.numeric_gy - cmp.expansion_no_z1, cmp.numeric_gy);
        csv.float_row(&[
            scale,
            cmp.max_epsilon,
            cmp.numeric_gy,
            cmp.numeric_eig,
            cmp.expansion,
            cmp.expansion_no_z1,
            rel,
            rel_no,
        ]);
        if cmp.max_epsilon > 0.0 && rel > 0.0 {
            points.push((cmp.max_epsilon.ln(), rel.ln()));
        }
    }

    let slope = fit_slope(&points);
    let slope_text = match slope {
        Some(s) => fmt_float(s),
        None => "nan".to_string(),
    };
    csv.footer("slope_rel_error_vs_max_epsilon", &slope_text);
    let summary = format!(
        "tracelog: {} scales, fitted log-log slope of rel_error vs max_epsilon = {}",
        bump.scales.len(),
        slope.map_or_else(|| "nan".to_string(), |s| format!("{s:.3}")),
    );
    Ok(Outcome::ok(Some(csv.finish()), summary))
}

fn bump_orbit(
    spec: &ModelSpec,
    x0: f64,
    amplitude: f64,
    scale: f64,
    grid: GridConfig,
) -> Result<PathGrid, Error> {
    let n = grid.points;
    let dtau = grid.horizon / (n - 1) as f64;
    let path = PathGrid::from_fn(-0.5 * grid.horizon, dtau, n, |t| {
        x0 + amplitude / (scale * t).cosh().powi(2)
    })?;
    path.check_in_domain(spec)?;
    Ok(path)
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (var > 0.0).then(|| cov / var)
}

// ---------------------------------------------------------------------------
// reparam
// ---------------------------------------------------------------------------

pub fn cmd_reparam(config: &RunConfig, spec: &ModelSpec) -> Result<Outcome, CliError> {
    let map_cfg: &MapConfig = require(&config.map, "map")?;
    let map = CoordinateMap::new(
        Function1D::parse(&map_cfg.expr)?,
        (map_cfg.y_lo, map_cfg.y_hi),
        map_cfg.samples,
    )?;

    // canonical check path: a centered bump well inside the map image
    let (img_lo, img_hi) = map.image()?;
    let center = 0.5 * (img_lo + img_hi);
    let radius = 0.3 * 0.5 * (img_hi - img_lo);
    let grid = config.grid;
    let scale = 24.0 / grid.horizon;
    let dtau = grid.horizon / (grid.points - 1) as f64;
    let path = PathGrid::from_fn(-0.5 * grid.horizon, dtau, grid.points, |t| {
        center + radius / (scale * t).cosh().powi(2)
    })?;

    let scalar = check_scalar(spec, &map, map_cfg.samples)?;
    let tensor = check_tensor(spec, &map, map_cfg.samples)?;
    let action = check_action_invariance(spec, &map, &path, spec.hbar())?;

    let mut csv = Csv::new(&["check", "quantity", "max_defect", "tolerance", "status"]);
    let mut summary = String::new();
    let mut all_passed = true;
    for (name, report) in [("scalar", &scalar), ("tensor", &tensor), ("action", &action)] {
        for (quantity, defect) in &report.defects {
            let passed = *defect <= report.tolerance;
            all_passed &= passed;
            csv.row(&[
                name.to_string(),
                quantity.to_string(),
                fmt_float(*defect),
                fmt_float(report.tolerance),
                if passed { "PASS" } else { "FAIL" }.to_string(),
            ]);
        }
        summary.push_str(&format!(
            "{name}: max defect {:.3e} (tolerance {:.0e}) {}\n",
            report.max_defect(),
            report.tolerance,
            if report.passed() { "PASS" } else { "FAIL" }
        ));
    }
    summary.push_str(if all_passed { "reparam: PASS" } else { "reparam: FAIL" });
    let failure = (!all_passed).then(|| {
        CliError::Core(Error::Internal {
            what: "covariance defects exceed module tolerances".to_string(),
        })
    });
    Ok(Outcome { csv: Some(csv.finish()), summary, failure })
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

pub fn cmd_evolve(config: &RunConfig, spec: &ModelSpec) -> Result<Outcome, CliError> {
    let orbit: &OrbitConfig = require(&config.orbit, "orbit")?;
    let grid = config.grid;
    let dtau = grid.horizon / (grid.points - 1) as f64;
    let start = OrbitState { tau: 0.0, x: orbit.x0, xdot: orbit.xdot0 };

    let (classical, exit_classical) =
        integrate_orbit_partial(spec, start, grid.horizon, dtau, false)?;
    let eff = effective_model(spec)?;
    let (corrected, exit_corrected) =
        integrate_orbit_partial(eff.as_spec(), start, grid.horizon, dtau, true)?;

    let rows = classical.len().min(corrected.len());
    let mut csv = Csv::new(&["tau", "x_classical", "x_effective", "delta"]);
    let mut max_delta = 0.0f64;
    for i in 0..rows {
        let a = classical.states[i];
        let b = corrected.states[i];
        let delta = (a.x - b.x).abs();
        max_delta = max_delta.max(delta);
        csv.float_row(&[a.tau, a.x, b.x, delta]);
    }
    csv.footer("max_delta", &fmt_float(max_delta));

    // adiabaticity along the classical orbit, where the frequency is real
    let epsilon = PathGrid::new(
        start.tau,
        dtau,
        classical.states.iter().map(|s| s.x).collect(),
    )
    .ok()
    .and_then(|p| effective::adiabaticity(spec, &p).ok())
    .map(|prof| prof.max_epsilon);
    csv.footer(
        "max_epsilon",
        &epsilon.map_or_else(|| "nan".to_string(), fmt_float),
    );

    let exit_tau = match (exit_classical, exit_corrected) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    if let Some(tau) = exit_tau {
        csv.footer("domain_exit_tau", &fmt_float(tau));
    }
    let summary = format!(
        "evolve: {} rows, max |x_classical - x_effective| = {max_delta:.6e}{}",
        rows,
        exit_tau.map_or_else(String::new, |t| format!(", domain exit at tau = {t:.6}")),
    );
    Ok(Outcome {
        csv: Some(csv.finish()),
        summary,
        failure: exit_tau.map(|tau| CliError::Core(Error::DomainExit { tau })),
    })
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn cmd_validate(config: &RunConfig, spec: &ModelSpec) -> Result<Outcome, CliError> {
    let samples = config.sweep.map_or(201, |s| s.samples);
    let report = validate_model(spec, samples)?;
    let status = if report.mass_positive { "PASS" } else { "FAIL" };
    let summary = format!(
        "validate: {} samples over [{}, {}]\n  mass minimum {:.6e} at x = {:.6}\n  mass positivity: {status}\n  omega_sq <= 0 at {} of {} points (advisory)",
        samples,
        spec.domain().0,
        spec.domain().1,
        report.min_mass,
        report.min_mass_x,
        report.omega_sq_nonpositive,
        report.entries.len(),
    );
    let failure = (!report.mass_positive).then(|| {
        CliError::Core(Error::NonPositiveMass { x: report.min_mass_x, mass: report.min_mass })
    });
    Ok(Outcome { csv: None, summary, failure })
}
