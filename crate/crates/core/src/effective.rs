//! Gradient-expansion quantities: the one-loop effective potential, the
//! kinetic coefficient, the corrected model, action values on paths and the
//! adiabaticity diagnostic.

use crate::covariant::{self, PathGrid};
use crate::error::{Error, Result};
use crate::expr::{self, Expr, UnaryFn};
use crate::model::{Function1D, ModelSpec};

/// One-loop effective potential V1(x) = Omega(x) / 2.
///
/// Omega is the positive root of Omega^2; points with Omega^2 <= 0 are a
/// typed error because the expansion presumes a real frequency there.
pub fn v1(spec: &ModelSpec, x: f64) -> Result<f64> {
    let w = covariant::omega_sq(spec, x)?;
    if w <= 0.0 {
        return Err(Error::NonPositiveFrequency { x, omega_sq: w });
    }
    Ok(0.5 * w.sqrt())
}

/// Kinetic coefficient Z1(x) = (d Omega/dx)^2 / (8 Omega^3).
///
/// Internally also evaluates the equivalent form (d Omega^2/dx)^2 /
/// (32 Omega^5) through a separately differentiated tree and insists the two
/// agree to 1e-10 relative.
pub fn z1(spec: &ModelSpec, x: f64) -> Result<f64> {
    let w = covariant::omega_sq(spec, x)?;
    if w <= 0.0 {
        return Err(Error::NonPositiveFrequency { x, omega_sq: w });
    }
    let w_expr = covariant::omega_sq_expr(spec);
    let omega_expr = expr::call(UnaryFn::Sqrt, w_expr.clone());

    let d_omega = omega_expr.derivative().eval(x)?;
    let omega = w.sqrt();
    let via_omega = d_omega * d_omega / (8.0 * omega.powi(3));

    let d_w = w_expr.derivative().eval(x)?;
    let via_w = d_w * d_w / (32.0 * w.powi(2) * omega);

    let scale = via_omega.abs().max(via_w.abs());
    if scale > 0.0 && (via_omega - via_w).abs() / scale > 1.0e-10 {
        return Err(Error::Internal {
            what: format!(
                "kinetic coefficient forms disagree at x = {x}: {via_omega} vs {via_w}"
            ),
        });
    }
    Ok(via_omega)
}

/// The corrected pair (m_eff, V_eff) with the source model kept alongside.
///
/// Both coefficients are expression trees, so their own derivatives are
/// available through the same structural differentiation chain, and hbar = 0
/// collapses them to the classical expressions exactly.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    model: ModelSpec,
    source: ModelSpec,
}

impl EffectiveModel {
    /// The corrected model as an ordinary `ModelSpec`.
    pub fn as_spec(&self) -> &ModelSpec {
        &self.model
    }

    pub fn source(&self) -> &ModelSpec {
        &self.source
    }

    pub fn hbar(&self) -> f64 {
        self.source.hbar()
    }

    fn check_frequency(&self, x: f64) -> Result<()> {
        if self.hbar() == 0.0 {
            // no correction; the classical coefficients need no frequency
            return Ok(());
        }
        let w = covariant::omega_sq(&self.source, x)?;
        if w <= 0.0 {
            return Err(Error::NonPositiveFrequency { x, omega_sq: w });
        }
        Ok(())
    }

    /// m_eff(x) = m(x) + hbar Z1(x).
    pub fn mass_eff(&self, x: f64) -> Result<f64> {
        self.check_frequency(x)?;
        self.model.mass_at(x)
    }

    /// V_eff(x) = V(x) + hbar Omega(x) / 2.
    pub fn potential_eff(&self, x: f64) -> Result<f64> {
        self.check_frequency(x)?;
        self.model.potential_at(x)
    }
}

/// Build the one-loop corrected model of `spec`.
pub fn effective_model(spec: &ModelSpec) -> Result<EffectiveModel> {
    let hbar = spec.hbar();
    let w_expr = covariant::omega_sq_expr(spec);
    let omega_expr = expr::call(UnaryFn::Sqrt, w_expr);
    let d_omega = omega_expr.derivative();

    let z1_expr = expr::div(
        expr::pow(d_omega, 2),
        expr::mul(Expr::Num(8.0), expr::pow(omega_expr.clone(), 3)),
    );
    let v1_expr = expr::div(omega_expr, Expr::Num(2.0));

    let mass_eff = expr::add(
        spec.mass().expr().clone(),
        expr::mul(Expr::Num(hbar), z1_expr),
    );
    let potential_eff = expr::add(
        spec.potential().expr().clone(),
        expr::mul(Expr::Num(hbar), v1_expr),
    );

    let model = ModelSpec::new(
        Function1D::new(mass_eff),
        Function1D::new(potential_eff),
        hbar,
        spec.domain(),
    )?;
    Ok(EffectiveModel { model, source: spec.clone() })
}

/// An action value together with the grid it was computed on.
#[derive(Debug, Clone, Copy)]
pub struct ActionValue {
    pub value: f64,
    pub horizon: f64,
    pub dtau: f64,
}

fn quadrature(
    path: &PathGrid,
    mut lagrangian: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<ActionValue> {
    let x = path.values();
    let v = path.velocities();
    let n = x.len();
    let dtau = path.dtau();
    let mut value = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 * dtau } else { dtau };
        value += w * lagrangian(x[i], v[i])?;
    }
    Ok(ActionValue { value, horizon: path.horizon(), dtau })
}

/// Trapezoid value of the classical action along `path`, with
/// central-difference velocities.
pub fn classical_action(spec: &ModelSpec, path: &PathGrid) -> Result<ActionValue> {
    path.check_in_domain(spec)?;
    quadrature(path, |x, v| {
        Ok(0.5 * spec.mass_at(x)? * v * v + spec.potential_at(x)?)
    })
}

/// Same quadrature with the one-loop corrected coefficients.
pub fn effective_action(spec: &ModelSpec, path: &PathGrid) -> Result<ActionValue> {
    path.check_in_domain(spec)?;
    let eff = effective_model(spec)?;
    quadrature(path, |x, v| {
        Ok(0.5 * eff.mass_eff(x)? * v * v + eff.potential_eff(x)?)
    })
}

/// Adiabaticity profile eps(tau) = |d Omega/d tau| / Omega^2 along a path.
#[derive(Debug, Clone)]
pub struct AdiabaticityProfile {
    pub epsilon: Vec<f64>,
    pub max_epsilon: f64,
}

/// The expansion is trusted when `max_epsilon` is small compared to 1.
pub fn adiabaticity(spec: &ModelSpec, path: &PathGrid) -> Result<AdiabaticityProfile> {
    path.check_in_domain(spec)?;
    let omega_expr = expr::call(UnaryFn::Sqrt, covariant::omega_sq_expr(spec));
    let d_omega = omega_expr.derivative();
    let v = path.velocities();
    let mut epsilon = Vec::with_capacity(path.len());
    let mut max_epsilon: f64 = 0.0;
    for (i, &x) in path.values().iter().enumerate() {
        let w = covariant::omega_sq(spec, x)?;
        if w <= 0.0 {
            return Err(Error::NonPositiveFrequency { x, omega_sq: w });
        }
        let eps = (d_omega.eval(x)? * v[i]).abs() / w;
        max_epsilon = max_epsilon.max(eps);
        epsilon.push(eps);
    }
    Ok(AdiabaticityProfile { epsilon, max_epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: &str, v: &str, hbar: f64) -> ModelSpec {
        ModelSpec::parse(m, v, hbar, (-5.0, 5.0)).unwrap()
    }

    fn standard() -> ModelSpec {
        spec("1+x^2", "0.5*x^2", 1.0)
    }

    #[test]
    fn v1_known_values() {
        let s = spec("1", "2*x^2", 1.0);
        assert_eq!(v1(&s, 0.3).unwrap(), 1.0);

        let s = standard();
        assert!((v1(&s, 1.0).unwrap() - 0.25).abs() < 1.0e-14);
        assert!((v1(&s, 0.0).unwrap() - 0.5).abs() < 1.0e-14);
    }

    #[test]
    fn v1_rejects_nonpositive_frequency() {
        let s = spec("exp(2*x)", "x", 1.0);
        assert!(matches!(
            v1(&s, 0.0),
            Err(Error::NonPositiveFrequency { .. })
        ));
    }

    #[test]
    fn z1_known_values() {
        // constant frequency: no kinetic correction
        let s = spec("1", "2*x^2", 1.0);
        assert_eq!(z1(&s, 0.8).unwrap(), 0.0);

        // hand chain for m = 1+x^2, V = x^2/2: Omega = 1/2, Omega' = -1/2 at x = 1
        let s = standard();
        assert!((z1(&s, 1.0).unwrap() - 0.25).abs() < 1.0e-12);
        // symmetric point: Omega'(0) = 0
        assert!(z1(&s, 0.0).unwrap().abs() < 1.0e-14);
    }

    #[test]
    fn effective_model_known_values() {
        // constant-mass harmonic: exact hbar omega / 2 shift, mass untouched
        let s = spec("1", "0.5*x^2", 1.0);
        let eff = effective_model(&s).unwrap();
        for k in 0..9 {
            let x = -2.0 + 0.5 * f64::from(k);
            assert!((eff.mass_eff(x).unwrap() - 1.0).abs() < 1.0e-15);
            let expected = 0.5 * x * x + 0.5;
            assert!((eff.potential_eff(x).unwrap() - expected).abs() < 1.0e-15);
        }

        let s = standard();
        let eff = effective_model(&s).unwrap();
        assert!((eff.mass_eff(1.0).unwrap() - 2.25).abs() < 1.0e-12);
        assert!((eff.potential_eff(1.0).unwrap() - 0.75).abs() < 1.0e-12);
    }

    #[test]
    fn corrections_are_nonnegative_where_defined() {
        let s = standard();
        let eff = effective_model(&s).unwrap();
        for k in 0..41 {
            let x = -2.0 + 0.1 * f64::from(k);
            let m = s.mass_at(x).unwrap();
            let v = s.potential_at(x).unwrap();
            assert!(eff.mass_eff(x).unwrap() >= m);
            assert!(eff.potential_eff(x).unwrap() >= v);
        }
    }

    #[test]
    fn hbar_zero_collapses_to_classical() {
        let s = spec("1+x^2", "0.5*x^2", 0.0);
        let eff = effective_model(&s).unwrap();
        // exact structural collapse, not just numerical closeness
        assert_eq!(eff.as_spec().mass().expr(), s.mass().expr());
        assert_eq!(eff.as_spec().potential().expr(), s.potential().expr());
    }

    #[test]
    fn classical_action_known_values() {
        // free particle on a straight line: 1/2
        let s = spec("1", "0", 1.0);
        let path = PathGrid::from_fn(0.0, 0.01, 101, |t| t).unwrap();
        let a = classical_action(&s, &path).unwrap();
        assert!((a.value - 0.5).abs() < 1.0e-10);

        // constant path: T V(c) exactly
        let s = spec("1", "2*x^2", 1.0);
        let path = PathGrid::from_fn(0.0, 0.05, 41, |_| 1.5).unwrap();
        let a = classical_action(&s, &path).unwrap();
        assert!((a.value - 2.0 * (2.0 * 1.5 * 1.5)).abs() < 1.0e-12);

        // m = 1+x^2, V = 0 on x(t) = t: integral of (1+t^2)/2 = 2/3
        let s = spec("1+x^2", "0", 1.0);
        let n = 801;
        let path = PathGrid::from_fn(0.0, 1.0 / (n as f64 - 1.0), n, |t| t).unwrap();
        let a = classical_action(&s, &path).unwrap();
        assert!((a.value - 2.0 / 3.0).abs() < 1.0e-6);
    }

    #[test]
    fn effective_action_limits() {
        // hbar = 0 degenerates to the classical value exactly
        let s = spec("1+x^2", "0.5*x^2", 0.0);
        let path = PathGrid::from_fn(-1.0, 0.02, 101, |t| 0.4 * t.tanh()).unwrap();
        let cl = classical_action(&s, &path).unwrap();
        let ef = effective_action(&s, &path).unwrap();
        assert_eq!(cl.value, ef.value);

        // constant path: T (V + hbar Omega / 2)
        let s = standard();
        let path = PathGrid::from_fn(0.0, 0.05, 41, |_| 1.0).unwrap();
        let ef = effective_action(&s, &path).unwrap();
        let t = path.horizon();
        let expected = t * (0.5 + 1.0 * 0.25);
        assert!((ef.value - expected).abs() < 1.0e-12);
    }

    #[test]
    fn action_difference_is_linear_in_hbar() {
        let path = PathGrid::from_fn(-2.0, 0.05, 81, |t| 0.6 * t.tanh()).unwrap();
        let base = spec("1+x^2", "0.5*x^2", 0.0);
        let cl = classical_action(&base, &path).unwrap().value;
        let shift = |hbar: f64| {
            let s = base.with_hbar(hbar).unwrap();
            effective_action(&s, &path).unwrap().value - cl
        };
        let d1 = shift(0.25);
        let d2 = shift(0.5);
        let d4 = shift(1.0);
        assert!((d2 - 2.0 * d1).abs() <= 1.0e-12 * d2.abs().max(1.0));
        assert!((d4 - 4.0 * d1).abs() <= 1.0e-12 * d4.abs().max(1.0));
    }

    #[test]
    fn adiabaticity_profile_behaviour() {
        // constant path and constant frequency both give eps = 0
        let s = standard();
        let path = PathGrid::from_fn(0.0, 0.1, 21, |_| 0.7).unwrap();
        let prof = adiabaticity(&s, &path).unwrap();
        assert_eq!(prof.max_epsilon, 0.0);

        let sh = spec("1", "2*x^2", 1.0);
        let moving = PathGrid::from_fn(-1.0, 0.1, 21, |t| t.sin()).unwrap();
        let prof = adiabaticity(&sh, &moving).unwrap();
        assert_eq!(prof.max_epsilon, 0.0);

        // slow bumps: max eps scales linearly with the speed parameter
        let eps_at = |speed: f64| {
            let n = 4001;
            let t_half = 12.0 / speed;
            let dtau = 2.0 * t_half / (n as f64 - 1.0);
            let path =
                PathGrid::from_fn(-t_half, dtau, n, |t| 0.5 / (speed * t).cosh().powi(2)).unwrap();
            adiabaticity(&s, &path).unwrap().max_epsilon
        };
        let e1 = eps_at(0.01);
        let e2 = eps_at(0.02);
        assert!((e2 / e1 - 2.0).abs() < 0.05, "ratio {}", e2 / e1);
    }
}
