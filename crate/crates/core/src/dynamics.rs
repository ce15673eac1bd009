//! Classical and quantum-corrected orbits in euclidean time.
//!
//! All motion follows the euclidean sign convention: the potential force
//! enters with the opposite sign of real-time mechanics, so generic orbits
//! grow like cosh and leaving the domain is an ordinary, reported outcome.

use crate::covariant;
use crate::effective::{self, EffectiveModel};
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// A phase-space point of the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitState {
    pub tau: f64,
    pub x: f64,
    pub xdot: f64,
}

/// A fixed-step orbit; consecutive states are exactly `dtau` apart.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dtau: f64,
    pub states: Vec<OrbitState>,
    pub used_effective: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &OrbitState {
        self.states.last().expect("trajectory holds at least the start state")
    }
}

/// Euclidean acceleration: Xddot = [V'(x) - m'(x) xdot^2 / 2] / m(x).
pub fn el_rhs(model: &ModelSpec, x: f64, xdot: f64) -> Result<f64> {
    let m = model.mass_at(x)?;
    let m1 = model.mass().deriv(1, x)?;
    let v1 = model.potential().deriv(1, x)?;
    Ok((v1 - 0.5 * m1 * xdot * xdot) / m)
}

fn rk4_step(model: &ModelSpec, x: f64, v: f64, dtau: f64) -> Result<(f64, f64)> {
    let a1 = el_rhs(model, x, v)?;
    let (x2, v2) = (x + 0.5 * dtau * v, v + 0.5 * dtau * a1);
    let a2 = el_rhs(model, x2, v2)?;
    let (x3, v3) = (x + 0.5 * dtau * v2, v + 0.5 * dtau * a2);
    let a3 = el_rhs(model, x3, v3)?;
    let (x4, v4) = (x + dtau * v3, v + dtau * a3);
    let a4 = el_rhs(model, x4, v4)?;
    Ok((
        x + dtau / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
        v + dtau / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    ))
}

/// Integrate for `horizon` with fixed step `dtau`, stopping early when the
/// orbit leaves the domain. Returns the (possibly truncated) trajectory and
/// the exit time, if any.
pub fn integrate_orbit_partial(
    model: &ModelSpec,
    start: OrbitState,
    horizon: f64,
    dtau: f64,
    used_effective: bool,
) -> Result<(Trajectory, Option<f64>)> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::NonPositiveStep { dtau });
    }
    let steps = (horizon / dtau).round() as i64;
    if !(horizon.is_finite() && horizon > 0.0) || steps < 1 {
        return Err(Error::NonPositiveHorizon { horizon });
    }
    model.check_domain(start.x)?;

    let mut states = Vec::with_capacity(steps as usize + 1);
    states.push(start);
    let mut x = start.x;
    let mut v = start.xdot;
    for k in 1..=steps {
        let tau = start.tau + dtau * k as f64;
        match rk4_step(model, x, v, dtau) {
            Ok((xn, vn)) => {
                if model.check_domain(xn).is_err() {
                    return Ok((
                        Trajectory { dtau, states, used_effective },
                        Some(tau),
                    ));
                }
                x = xn;
                v = vn;
                states.push(OrbitState { tau, x, xdot: v });
            }
            // a stage probed outside the domain: treat as an exit at this step
            Err(Error::OutOfDomain { .. }) => {
                return Ok((
                    Trajectory { dtau, states, used_effective },
                    Some(tau),
                ));
            }
            Err(other) => return Err(other),
        }
    }
    Ok((Trajectory { dtau, states, used_effective }, None))
}

/// Integrate for `horizon`; an orbit that leaves the domain is an error
/// carrying the exit time.
pub fn integrate_orbit(
    model: &ModelSpec,
    start: OrbitState,
    horizon: f64,
    dtau: f64,
) -> Result<Trajectory> {
    let (trajectory, exit) = integrate_orbit_partial(model, start, horizon, dtau, false)?;
    match exit {
        None => Ok(trajectory),
        Some(tau) => Err(Error::DomainExit { tau }),
    }
}

/// Classical and one-loop-corrected orbits from the same start, with the
/// largest pointwise deviation between them.
#[derive(Debug, Clone)]
pub struct QuantumShift {
    pub classical: Trajectory,
    pub effective: Trajectory,
    pub max_deviation: f64,
}

/// Integrate `start` under the classical and the corrected model and compare.
/// The deviation vanishes linearly as hbar goes to zero.
pub fn quantum_shift(
    spec: &ModelSpec,
    start: OrbitState,
    horizon: f64,
    dtau: f64,
) -> Result<QuantumShift> {
    let effective: EffectiveModel = effective::effective_model(spec)?;
    let (classical, exit) = integrate_orbit_partial(spec, start, horizon, dtau, false)?;
    if let Some(tau) = exit {
        return Err(Error::DomainExit { tau });
    }
    let corrected = integrate_orbit_partial(effective.as_spec(), start, horizon, dtau, true)
        .map_err(|e| promote_sqrt_error(spec, e))?;
    let (corrected, exit) = corrected;
    if let Some(tau) = exit {
        return Err(Error::DomainExit { tau });
    }
    let max_deviation = classical
        .states
        .iter()
        .zip(&corrected.states)
        .map(|(a, b)| (a.x - b.x).abs())
        .fold(0.0, f64::max);
    Ok(QuantumShift { classical, effective: corrected, max_deviation })
}

/// The corrected coefficients contain sqrt(Omega^2); a sqrt domain failure
/// while integrating them means the frequency went non-positive.
fn promote_sqrt_error(spec: &ModelSpec, e: Error) -> Error {
    if let Error::SqrtDomain { x, .. } = e {
        if let Ok(w) = covariant::omega_sq(spec, x) {
            return Error::NonPositiveFrequency { x, omega_sq: w };
        }
    }
    e
}
