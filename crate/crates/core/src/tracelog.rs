//! Exact numerical evaluation of the one-loop trace-log on a finite horizon,
//! by two independent routes: a Gelfand-Yaglom initial-value integration and
//! a lattice log-determinant. Both are normalized against a constant
//! reference frequency, which removes the boundary prefactors and isolates
//! the bulk quantity the gradient expansion predicts.

use crate::covariant::{self, PathGrid};
use crate::effective;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::tridiag;

/// Tolerated absolute deviation of the profile endpoints from the reference.
pub const ENDPOINT_TOL: f64 = 1.0e-8;

/// Omega^2(tau) sampled on a uniform grid, with a constant positive
/// reference Omega0^2 for the determinant ratio.
#[derive(Debug, Clone)]
pub struct FrequencyProfile {
    tau0: f64,
    dtau: f64,
    omega_sq: Vec<f64>,
    omega0_sq: f64,
}

impl FrequencyProfile {
    pub fn new(tau0: f64, dtau: f64, omega_sq: Vec<f64>, omega0_sq: f64) -> Result<FrequencyProfile> {
        if !(dtau.is_finite() && dtau > 0.0) {
            return Err(Error::NonPositiveStep { dtau });
        }
        if omega_sq.len() < 3 {
            return Err(Error::GridTooSmall { len: omega_sq.len(), min: 3 });
        }
        if !(omega0_sq.is_finite() && omega0_sq > 0.0) {
            return Err(Error::NonPositiveReference { omega0_sq });
        }
        if let Some(bad) = omega_sq.iter().find(|v| !v.is_finite()) {
            return Err(Error::Internal { what: format!("non-finite profile value {bad}") });
        }
        Ok(FrequencyProfile { tau0, dtau, omega_sq, omega0_sq })
    }

    /// Profile of Omega^2 along a background path of `spec`.
    pub fn from_path(spec: &ModelSpec, path: &PathGrid, omega0_sq: f64) -> Result<FrequencyProfile> {
        let omega_sq = path
            .values()
            .iter()
            .map(|&x| covariant::omega_sq(spec, x))
            .collect::<Result<Vec<_>>>()?;
        FrequencyProfile::new(path.tau0(), path.dtau(), omega_sq, omega0_sq)
    }

    pub fn constant(tau0: f64, dtau: f64, n: usize, omega_sq: f64, omega0_sq: f64) -> Result<FrequencyProfile> {
        FrequencyProfile::new(tau0, dtau, vec![omega_sq; n], omega0_sq)
    }

    pub fn len(&self) -> usize {
        self.omega_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_sq.is_empty()
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn horizon(&self) -> f64 {
        self.dtau * (self.omega_sq.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.omega_sq
    }

    pub fn omega0_sq(&self) -> f64 {
        self.omega0_sq
    }

    /// Largest absolute deviation of the two endpoint values from the
    /// reference; the comparison protocol wants this below [`ENDPOINT_TOL`].
    pub fn endpoint_defect(&self) -> f64 {
        let first = (self.omega_sq[0] - self.omega0_sq).abs();
        let last = (self.omega_sq[self.omega_sq.len() - 1] - self.omega0_sq).abs();
        first.max(last)
    }
}

/// Fixed-step 4th-order integration of y'' = W(tau) y with y = 0, y' = 1 at
/// the left end, carried in rescaled variables so that huge solutions only
/// accumulate a log factor. Returns log y at the right end.
fn gy_log_solution(values: &[f64], dtau: f64) -> Result<f64> {
    const RESCALE: f64 = 1.0e150;
    let mut y = 0.0_f64;
    let mut yp = 1.0_f64;
    let mut log_scale = 0.0_f64;
    for i in 0..values.len() - 1 {
        let w0 = values[i];
        let w1 = values[i + 1];
        let wm = 0.5 * (w0 + w1); // linear interpolation at the half step

        let k1y = yp;
        let k1p = w0 * y;
        let k2y = yp + 0.5 * dtau * k1p;
        let k2p = wm * (y + 0.5 * dtau * k1y);
        let k3y = yp + 0.5 * dtau * k2p;
        let k3p = wm * (y + 0.5 * dtau * k2y);
        let k4y = yp + dtau * k3p;
        let k4p = w1 * (y + dtau * k3y);

        y += dtau / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        yp += dtau / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);

        let mag = y.abs().max(yp.abs());
        if mag > RESCALE {
            y /= mag;
            yp /= mag;
            log_scale += mag.ln();
        }
    }
    if y <= 0.0 {
        return Err(Error::NonPositiveDeterminant { value: y });
    }
    Ok(y.ln() + log_scale)
}

/// Log of the Dirichlet determinant ratio det(-d^2 + W) / det(-d^2 + W0)
/// through the Gelfand-Yaglom boundary values.
pub fn gy_logdet_ratio(profile: &FrequencyProfile) -> Result<f64> {
    let horizon = profile.horizon();
    if horizon <= 0.0 {
        return Err(Error::NonPositiveHorizon { horizon });
    }
    let with_profile = gy_log_solution(profile.values(), profile.dtau())?;
    let reference = vec![profile.omega0_sq(); profile.len()];
    let with_reference = gy_log_solution(&reference, profile.dtau())?;
    Ok(with_profile - with_reference)
}

/// The same log-determinant ratio from LDL^T pivots of the interior-point
/// lattice operators (as in `covariant::transformed_kernel`).
pub fn eig_logdet_ratio(profile: &FrequencyProfile) -> Result<f64> {
    let n = profile.len();
    if n < 16 {
        return Err(Error::GridTooSmall { len: n, min: 16 });
    }
    let dtau2 = profile.dtau() * profile.dtau();
    let interior = &profile.values()[1..n - 1];
    let diag: Vec<f64> = interior.iter().map(|&w| 2.0 / dtau2 + w).collect();
    let diag0 = vec![2.0 / dtau2 + profile.omega0_sq(); n - 2];
    let off = vec![-1.0 / dtau2; n - 3];
    Ok(tridiag::ldlt_log_det(&diag, &off)? - tridiag::ldlt_log_det(&diag0, &off)?)
}

/// One-loop correction Gamma_1 relative to the constant reference:
/// half the log-determinant ratio.
pub fn gamma1_numeric(profile: &FrequencyProfile) -> Result<f64> {
    Ok(0.5 * gy_logdet_ratio(profile)?)
}

fn gamma1_expansion_impl(
    spec: &ModelSpec,
    path: &PathGrid,
    omega0_sq: f64,
    with_kinetic: bool,
) -> Result<f64> {
    if !(omega0_sq.is_finite() && omega0_sq > 0.0) {
        return Err(Error::NonPositiveReference { omega0_sq });
    }
    path.check_in_domain(spec)?;
    let x = path.values();
    let n = x.len();
    let first = covariant::omega_sq(spec, x[0])?;
    let last = covariant::omega_sq(spec, x[n - 1])?;
    let defect = (first - omega0_sq).abs().max((last - omega0_sq).abs());
    if defect > ENDPOINT_TOL {
        return Err(Error::EndpointMismatch { defect, tol: ENDPOINT_TOL });
    }

    let omega0 = omega0_sq.sqrt();
    let velocities = path.velocities();
    let dtau = path.dtau();
    // z1 along a path, with the expression trees built once
    let w_expr = covariant::omega_sq_expr(spec);
    let omega_expr = crate::expr::call(crate::expr::UnaryFn::Sqrt, w_expr);
    let d_omega = omega_expr.derivative();

    let mut value = 0.0;
    for i in 0..n {
        let w = covariant::omega_sq(spec, x[i])?;
        if w <= 0.0 {
            return Err(Error::NonPositiveFrequency { x: x[i], omega_sq: w });
        }
        let omega = w.sqrt();
        let mut integrand = 0.5 * (omega - omega0);
        if with_kinetic {
            let slope = d_omega.eval(x[i])?;
            let z1 = slope * slope / (8.0 * omega.powi(3));
            integrand += 0.5 * z1 * velocities[i] * velocities[i];
        }
        let weight = if i == 0 || i == n - 1 { 0.5 * dtau } else { dtau };
        value += weight * integrand;
    }
    Ok(value)
}

/// Gradient-expansion prediction for Gamma_1 relative to the reference:
/// the trapezoid value of (Omega(X) - Omega0)/2 + Z1(X) Xdot^2 / 2.
pub fn gamma1_expansion(spec: &ModelSpec, path: &PathGrid, omega0_sq: f64) -> Result<f64> {
    gamma1_expansion_impl(spec, path, omega0_sq, true)
}

/// The prediction with the kinetic term dropped; kept around to demonstrate
/// that the Z1 term is what makes the expansion work at finite speed.
pub fn gamma1_expansion_no_z1(spec: &ModelSpec, path: &PathGrid, omega0_sq: f64) -> Result<f64> {
    gamma1_expansion_impl(spec, path, omega0_sq, false)
}

/// Momentum-integral form of the effective-potential difference:
/// (1/2) int dk/2pi log[(k^2 + W) / (k^2 + W0)], evaluated with a tangent
/// substitution. Equals (Omega - Omega0)/2 analytically.
pub fn v1_momentum_check(omega_sq: f64, omega0_sq: f64) -> Result<f64> {
    if !(omega_sq.is_finite() && omega_sq > 0.0) {
        return Err(Error::NonPositiveMomentumFrequency { omega_sq });
    }
    if !(omega0_sq.is_finite() && omega0_sq > 0.0) {
        return Err(Error::NonPositiveMomentumFrequency { omega_sq: omega0_sq });
    }
    // even integrand: 2 * (1/4pi) int_0^inf = (1/2pi) int_0^inf, k = tan(theta)
    let integrand = |theta: f64| {
        let c = theta.cos();
        if c < 1.0e-12 {
            // sec^2 log -> Omega^2 - Omega0^2 limit at theta = pi/2
            return omega_sq - omega0_sq;
        }
        let k2 = theta.tan().powi(2);
        ((k2 + omega_sq) / (k2 + omega0_sq)).ln() / (c * c)
    };
    let n = 8192; // Simpson intervals; the integrand is smooth on [0, pi/2]
    let a = 0.0;
    let b = std::f64::consts::FRAC_PI_2;
    let h = (b - a) / n as f64;
    let mut sum = integrand(a) + integrand(b);
    for i in 1..n {
        let theta = a + h * i as f64;
        sum += integrand(theta) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(sum * h / 3.0 / (2.0 * std::f64::consts::PI))
}

/// Convenience for calibration sweeps: a centered bump orbit
/// X(tau) = x0 + amplitude sech^2(scale tau) sampled symmetrically.
pub fn bump_path(x0: f64, amplitude: f64, scale: f64, half_width: f64, n: usize) -> Result<PathGrid> {
    let dtau = 2.0 * half_width / (n as f64 - 1.0);
    PathGrid::from_fn(-half_width, dtau, n, |t| {
        x0 + amplitude / (scale * t).cosh().powi(2)
    })
}

/// Gamma_1 comparison on one bump path: numeric (both routes), expansion
/// with and without the kinetic term, and the adiabaticity measure.
#[derive(Debug, Clone, Copy)]
pub struct Gamma1Comparison {
    pub max_epsilon: f64,
    pub numeric_gy: f64,
    pub numeric_eig: f64,
    pub expansion: f64,
    pub expansion_no_z1: f64,
}

impl Gamma1Comparison {
    pub fn rel_error(&self) -> f64 {
        (self.numeric_gy - self.expansion).abs() / self.numeric_gy.abs()
    }

    pub fn rel_error_no_z1(&self) -> f64 {
        (self.numeric_gy - self.expansion_no_z1).abs() / self.numeric_gy.abs()
    }
}

/// Run the full comparison for one path of `spec` against the reference
/// frequency at the path endpoints.
pub fn gamma1_compare(spec: &ModelSpec, path: &PathGrid, omega0_sq: f64) -> Result<Gamma1Comparison> {
    let profile = FrequencyProfile::from_path(spec, path, omega0_sq)?;
    let gy = gamma1_numeric(&profile)?;
    let eig = 0.5 * eig_logdet_ratio(&profile)?;
    let expansion = gamma1_expansion(spec, path, omega0_sq)?;
    let expansion_no_z1 = gamma1_expansion_no_z1(spec, path, omega0_sq)?;
    let eps = effective::adiabaticity(spec, path)?.max_epsilon;
    Ok(Gamma1Comparison {
        max_epsilon: eps,
        numeric_gy: gy,
        numeric_eig: eig,
        expansion,
        expansion_no_z1,
    })
}
