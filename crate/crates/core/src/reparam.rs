//! Coordinate transformations x = x(y) and executable covariance checks:
//! the frequency scalar and effective potential transform as scalars, the
//! mass and kinetic coefficient as rank-two tensors, and action values do
//! not depend on the chart at all.

use crate::covariant::{self, PathGrid};
use crate::effective::{self, effective_model};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::{Function1D, ModelSpec};

pub const SCALAR_TOL: f64 = 1.0e-9;
pub const TENSOR_TOL: f64 = 1.0e-9;
pub const ACTION_TOL: f64 = 1.0e-6;

/// A strictly monotone map x = forward(y) on a declared y-interval.
/// The inverse is numeric (bisection); the expression language stays closed.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    forward: Function1D,
    y_domain: (f64, f64),
    increasing: bool,
}

impl CoordinateMap {
    /// Build a map, checking strict monotonicity by sampling the derivative
    /// at `samples` uniform points (sign must not change, |x'| > 1e-12).
    pub fn new(forward: Function1D, y_domain: (f64, f64), samples: usize) -> Result<CoordinateMap> {
        let (lo, hi) = y_domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        let samples = samples.max(2);
        let step = (hi - lo) / (samples - 1) as f64;
        let mut sign = 0.0_f64;
        for i in 0..samples {
            let y = if i + 1 == samples { hi } else { lo + step * i as f64 };
            let d = forward.deriv(1, y)?;
            if d.abs() <= 1.0e-12 {
                return Err(Error::NonMonotoneMap { y });
            }
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign {
                return Err(Error::NonMonotoneMap { y });
            }
        }
        Ok(CoordinateMap { forward, y_domain, increasing: sign > 0.0 })
    }

    pub fn parse(source: &str, y_domain: (f64, f64)) -> Result<CoordinateMap> {
        CoordinateMap::new(Function1D::parse(source)?, y_domain, 257)
    }

    pub fn forward(&self) -> &Function1D {
        &self.forward
    }

    pub fn y_domain(&self) -> (f64, f64) {
        self.y_domain
    }

    /// Image interval [min, max] of the map.
    pub fn image(&self) -> Result<(f64, f64)> {
        let a = self.forward.eval(self.y_domain.0)?;
        let b = self.forward.eval(self.y_domain.1)?;
        Ok(if a <= b { (a, b) } else { (b, a) })
    }

    /// Numeric inverse by bisection on the monotone interval, to 1e-12.
    pub fn invert(&self, x: f64) -> Result<f64> {
        let (img_lo, img_hi) = self.image()?;
        if x < img_lo - 1.0e-12 || x > img_hi + 1.0e-12 {
            return Err(Error::OutsideMapImage { x, lo: img_lo, hi: img_hi });
        }
        let (mut lo, mut hi) = self.y_domain;
        if !self.increasing {
            std::mem::swap(&mut lo, &mut hi);
        }
        // invariants: f(lo) <= x <= f(hi) in the oriented interval
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo).abs() <= 1.0e-12 {
                break;
            }
            if self.forward.eval(mid)? < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Transform a model to y-coordinates: V is a scalar, m a rank-two tensor.
/// The new coefficients are composed expression trees, no numerics involved.
pub fn pushforward_model(spec: &ModelSpec, map: &CoordinateMap) -> Result<ModelSpec> {
    let (img_lo, img_hi) = map.image()?;
    let (lo, hi) = spec.domain();
    if img_lo < lo - 1.0e-12 || img_hi > hi + 1.0e-12 {
        return Err(Error::OutsideMapImage { x: if img_lo < lo { img_lo } else { img_hi }, lo, hi });
    }
    let f = map.forward().expr();
    let f_prime = map.forward().deriv_expr(1)?;
    let mass = Expr::Mul(
        Box::new(spec.mass().expr().substitute(f)),
        Box::new(Expr::Pow(Box::new(f_prime.clone()), 2)),
    );
    let potential = spec.potential().expr().substitute(f);
    ModelSpec::new(
        Function1D::new(mass),
        Function1D::new(potential),
        spec.hbar(),
        map.y_domain(),
    )
}

/// Carry a path from x-coordinates to y-coordinates through the numeric
/// inverse, keeping the time grid.
pub fn pushforward_path(path: &PathGrid, map: &CoordinateMap) -> Result<PathGrid> {
    let values = path
        .values()
        .iter()
        .map(|&x| map.invert(x))
        .collect::<Result<Vec<_>>>()?;
    PathGrid::new(path.tau0(), path.dtau(), values)
}

/// Outcome of one covariance sweep.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    /// (quantity, worst relative defect) pairs.
    pub defects: Vec<(&'static str, f64)>,
    pub tolerance: f64,
}

impl CovarianceReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_defect() <= self.tolerance
    }
}

/// Relative defect with a small floor so that isolated zeros of the compared
/// quantity (Z1 at symmetric points) do not turn roundoff into a failure.
fn rel_defect(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0e-3)
}

fn sample_points(domain: (f64, f64), samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let step = (domain.1 - domain.0) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { domain.1 } else { domain.0 + step * i as f64 })
        .collect()
}

/// Scalar law: the frequency scalar and the one-loop potential evaluated in
/// the y-chart equal their x-chart values at x(y).
pub fn check_scalar(spec: &ModelSpec, map: &CoordinateMap, samples: usize) -> Result<CovarianceReport> {
    let pushed = pushforward_model(spec, map)?;
    let mut omega_defect = 0.0_f64;
    let mut v1_defect = 0.0_f64;
    for y in sample_points(map.y_domain(), samples) {
        let x = map.forward().eval(y)?;
        omega_defect = omega_defect.max(rel_defect(
            covariant::omega_sq(&pushed, y)?,
            covariant::omega_sq(spec, x)?,
        ));
        v1_defect = v1_defect.max(rel_defect(
            effective::v1(&pushed, y)?,
            effective::v1(spec, x)?,
        ));
    }
    Ok(CovarianceReport {
        defects: vec![("omega_sq", omega_defect), ("v1", v1_defect)],
        tolerance: SCALAR_TOL,
    })
}

/// Tensor law: m_eff and Z1 pick up the squared Jacobian.
pub fn check_tensor(spec: &ModelSpec, map: &CoordinateMap, samples: usize) -> Result<CovarianceReport> {
    let pushed = pushforward_model(spec, map)?;
    let eff_pushed = effective_model(&pushed)?;
    let eff = effective_model(spec)?;
    let mut mass_defect = 0.0_f64;
    let mut z1_defect = 0.0_f64;
    for y in sample_points(map.y_domain(), samples) {
        let x = map.forward().eval(y)?;
        let jac_sq = map.forward().deriv(1, y)?.powi(2);
        mass_defect = mass_defect.max(rel_defect(
            eff_pushed.mass_eff(y)?,
            eff.mass_eff(x)? * jac_sq,
        ));
        z1_defect = z1_defect.max(rel_defect(
            effective::z1(&pushed, y)?,
            effective::z1(spec, x)? * jac_sq,
        ));
    }
    Ok(CovarianceReport {
        defects: vec![("mass_eff", mass_defect), ("z1", z1_defect)],
        tolerance: TENSOR_TOL,
    })
}

/// Chart independence of action values: the classical and effective actions
/// of a path agree between the x-chart and the y-chart to quadrature
/// accuracy.
pub fn check_action_invariance(
    spec: &ModelSpec,
    map: &CoordinateMap,
    path: &PathGrid,
    hbar: f64,
) -> Result<CovarianceReport> {
    let spec = spec.with_hbar(hbar)?;
    let pushed_model = pushforward_model(&spec, map)?;
    let pushed_path = pushforward_path(path, map)?;

    let classical_x = effective::classical_action(&spec, path)?.value;
    let classical_y = effective::classical_action(&pushed_model, &pushed_path)?.value;
    let effective_x = effective::effective_action(&spec, path)?.value;
    let effective_y = effective::effective_action(&pushed_model, &pushed_path)?.value;

    Ok(CovarianceReport {
        defects: vec![
            ("classical_action", rel_defect(classical_x, classical_y)),
            ("effective_action", rel_defect(effective_x, effective_y)),
        ],
        tolerance: ACTION_TOL,
    })
}
