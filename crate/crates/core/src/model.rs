//! Model definition: a coordinate-dependent mass, a potential, hbar and a
//! working domain. The mass plays the role of a one-dimensional metric and
//! must stay positive wherever it is used.

use crate::covariant;
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};

/// A scalar function of `x` with its first four structural derivatives
/// cached as expression trees.
#[derive(Debug, Clone)]
pub struct Function1D {
    derivs: [Expr; 5],
}

impl Function1D {
    pub fn new(base: Expr) -> Function1D {
        let d1 = base.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        let d4 = d3.derivative();
        Function1D { derivs: [base, d1, d2, d3, d4] }
    }

    pub fn parse(source: &str) -> Result<Function1D> {
        Ok(Function1D::new(parse_expression(source)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.derivs[0]
    }

    /// Expression tree of the k-th derivative, 0 <= k <= 4.
    pub fn deriv_expr(&self, order: u32) -> Result<&Expr> {
        self.derivs
            .get(order as usize)
            .ok_or(Error::DerivativeOrder { order })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.derivs[0].eval(x)
    }

    /// Value of the k-th derivative at `x`, 0 <= k <= 4.
    pub fn deriv(&self, order: u32, x: f64) -> Result<f64> {
        self.deriv_expr(order)?.eval(x)
    }
}

/// The pair (m, V) with hbar and the working interval.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    mass: Function1D,
    potential: Function1D,
    hbar: f64,
    domain: (f64, f64),
}

impl ModelSpec {
    pub fn new(
        mass: Function1D,
        potential: Function1D,
        hbar: f64,
        domain: (f64, f64),
    ) -> Result<ModelSpec> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        // hbar = 0 is allowed: it switches every one-loop correction off,
        // which the classical-limit checks rely on.
        if !hbar.is_finite() || hbar < 0.0 {
            return Err(Error::InvalidHbar { hbar });
        }
        Ok(ModelSpec { mass, potential, hbar, domain })
    }

    pub fn parse(
        mass_src: &str,
        potential_src: &str,
        hbar: f64,
        domain: (f64, f64),
    ) -> Result<ModelSpec> {
        ModelSpec::new(
            Function1D::parse(mass_src)?,
            Function1D::parse(potential_src)?,
            hbar,
            domain,
        )
    }

    pub fn mass(&self) -> &Function1D {
        &self.mass
    }

    pub fn potential(&self) -> &Function1D {
        &self.potential
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Same model with a different hbar.
    pub fn with_hbar(&self, hbar: f64) -> Result<ModelSpec> {
        ModelSpec::new(self.mass.clone(), self.potential.clone(), hbar, self.domain)
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if x < lo || x > hi || !x.is_finite() {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        Ok(())
    }

    /// Mass value with domain and positivity checks.
    pub fn mass_at(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let m = self.mass.eval(x)?;
        if m <= 0.0 {
            return Err(Error::NonPositiveMass { x, mass: m });
        }
        Ok(m)
    }

    pub fn potential_at(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        self.potential.eval(x)
    }
}

/// One sampled point of a validation sweep.
#[derive(Debug, Clone, Copy)]
pub struct ValidationEntry {
    pub x: f64,
    pub mass: f64,
    /// None where the mass is not positive, so the frequency is undefined.
    pub omega_sq: Option<f64>,
}

/// Result of sweeping the mass (and the frequency sign, as an advisory)
/// over the domain.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
    pub min_mass: f64,
    pub min_mass_x: f64,
    pub mass_positive: bool,
    /// Number of sampled points with omega^2 <= 0 (advisory only).
    pub omega_sq_nonpositive: usize,
}

/// Evaluate the mass at `samples` uniform points of the domain and report
/// the minimum and positivity, with the sign of omega^2 as an advisory.
pub fn validate_model(spec: &ModelSpec, samples: usize) -> Result<ValidationReport> {
    if samples < 2 {
        return Err(Error::GridTooSmall { len: samples, min: 2 });
    }
    let (lo, hi) = spec.domain();
    let step = (hi - lo) / (samples - 1) as f64;
    let mut entries = Vec::with_capacity(samples);
    let mut min_mass = f64::INFINITY;
    let mut min_mass_x = lo;
    let mut omega_sq_nonpositive = 0;
    for i in 0..samples {
        let x = if i + 1 == samples { hi } else { lo + step * i as f64 };
        let mass = spec.mass().eval(x)?;
        if mass < min_mass {
            min_mass = mass;
            min_mass_x = x;
        }
        let omega_sq = if mass > 0.0 {
            let w = covariant::omega_sq(spec, x)?;
            if w <= 0.0 {
                omega_sq_nonpositive += 1;
            }
            Some(w)
        } else {
            None
        };
        entries.push(ValidationEntry { x, mass, omega_sq });
    }
    Ok(ValidationReport {
        entries,
        min_mass,
        min_mass_x,
        mass_positive: min_mass > 0.0,
        omega_sq_nonpositive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_chain_is_consistent() {
        // deriv(k) of deriv(j) equals deriv(k+j) pointwise.
        let f = Function1D::parse("sin(x) * exp(x/2) + x^3").unwrap();
        let d1 = Function1D::new(f.deriv_expr(1).unwrap().clone());
        for k in 0..6 {
            let x = -1.2 + 0.5 * f64::from(k);
            let a = d1.deriv(1, x).unwrap();
            let b = f.deriv(2, x).unwrap();
            let scale = a.abs().max(b.abs()).max(1.0e-30);
            assert!((a - b).abs() / scale <= 1.0e-10, "at {x}: {a} vs {b}");
        }
    }

    #[test]
    fn validation_passes_for_positive_mass() {
        let spec = ModelSpec::parse("1+x^2", "0.5*x^2", 1.0, (-2.0, 2.0)).unwrap();
        let report = validate_model(&spec, 41).unwrap();
        assert!(report.mass_positive);
        assert_eq!(report.min_mass, 1.0);
        assert_eq!(report.min_mass_x, 0.0);
        assert_eq!(report.omega_sq_nonpositive, 0);
    }

    #[test]
    fn validation_flags_sign_change() {
        let spec = ModelSpec::parse("x", "0", 1.0, (-1.0, 1.0)).unwrap();
        let report = validate_model(&spec, 21).unwrap();
        assert!(!report.mass_positive);
        assert!(report.min_mass <= -1.0 + 1.0e-12);
    }

    #[test]
    fn validation_reports_exponential_minimum() {
        // oracle: direct evaluation, min of exp(2x) on [-5, 5] is e^{-10}
        let spec = ModelSpec::parse("exp(2*x)", "0", 1.0, (-5.0, 5.0)).unwrap();
        let report = validate_model(&spec, 101).unwrap();
        assert!(report.mass_positive);
        let expected = (-10.0f64).exp();
        assert!((report.min_mass - expected).abs() / expected <= 1.0e-12);
    }

    #[test]
    fn hbar_zero_is_allowed_but_negative_is_not() {
        assert!(ModelSpec::parse("1", "0", 0.0, (-1.0, 1.0)).is_ok());
        assert!(matches!(
            ModelSpec::parse("1", "0", -0.5, (-1.0, 1.0)),
            Err(Error::InvalidHbar { .. })
        ));
    }

    #[test]
    fn mass_positivity_is_checked_at_access() {
        let spec = ModelSpec::parse("x", "0", 1.0, (-1.0, 1.0)).unwrap();
        assert!(matches!(
            spec.mass_at(-0.5),
            Err(Error::NonPositiveMass { .. })
        ));
        assert!(matches!(
            spec.mass_at(3.0),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
