//! Covariant geometry of the configuration space: Christoffel symbol,
//! einbein, the frequency scalar, the extremal-orbit residual, and the
//! discretized fluctuation kernels on a euclidean-time lattice.

use crate::error::{Error, Result};
use crate::expr::{self, Expr, UnaryFn};
use crate::model::ModelSpec;
use crate::tridiag;

/// Christoffel symbol gamma(x) = m'(x) / 2 m(x) of the 1-D metric m.
pub fn christoffel(spec: &ModelSpec, x: f64) -> Result<f64> {
    let m = spec.mass_at(x)?;
    let m1 = spec.mass().deriv(1, x)?;
    Ok(m1 / (2.0 * m))
}

/// Einbein h(x) = sqrt(m(x)). Covariantly constant: h' - gamma h = 0.
pub fn einbein(spec: &ModelSpec, x: f64) -> Result<f64> {
    Ok(spec.mass_at(x)?.sqrt())
}

/// Frequency scalar Omega^2(x) = [V''(x) - gamma(x) V'(x)] / m(x).
///
/// May be non-positive; callers that need a real frequency reject that case
/// themselves.
pub fn omega_sq(spec: &ModelSpec, x: f64) -> Result<f64> {
    let m = spec.mass_at(x)?;
    let gamma = spec.mass().deriv(1, x)? / (2.0 * m);
    let v1 = spec.potential().deriv(1, x)?;
    let v2 = spec.potential().deriv(2, x)?;
    Ok((v2 - gamma * v1) / m)
}

/// Frequency scalar through the Laplace-Beltrami route,
/// m^{-1/2} d/dx [ sqrt(m) (V'/m) ], evaluated by structurally
/// differentiating the composed expression tree. Independent arithmetic
/// from [`omega_sq`]; the two must agree to 1e-10 relative.
pub fn omega_sq_lb(spec: &ModelSpec, x: f64) -> Result<f64> {
    let m = spec.mass_at(x)?;
    let flux = Expr::Mul(
        Box::new(Expr::Call(UnaryFn::Sqrt, Box::new(spec.mass().expr().clone()))),
        Box::new(Expr::Div(
            Box::new(spec.potential().deriv_expr(1)?.clone()),
            Box::new(spec.mass().expr().clone()),
        )),
    );
    Ok(flux.derivative().eval(x)? / m.sqrt())
}

/// Omega^2 as an expression tree, for stacking further derivatives on top
/// (the kinetic correction needs d(sqrt(Omega^2))/dx exactly).
pub fn omega_sq_expr(spec: &ModelSpec) -> Expr {
    let m = spec.mass().expr().clone();
    let m1 = spec.mass().expr().derivative();
    let v1 = spec.potential().expr().derivative();
    let v2 = v1.derivative();
    let gamma = expr::div(m1, expr::mul(Expr::Num(2.0), m.clone()));
    expr::div(expr::sub(v2, expr::mul(gamma, v1)), m)
}

/// Euler-Lagrange residual V'(x) - m'(x) xdot^2 / 2 - m(x) xddot
/// (euclidean sign convention). Vanishes on extremal orbits.
pub fn el_residual(spec: &ModelSpec, x: f64, xdot: f64, xddot: f64) -> Result<f64> {
    spec.check_domain(x)?;
    let m = spec.mass().eval(x)?;
    let m1 = spec.mass().deriv(1, x)?;
    let v1 = spec.potential().deriv(1, x)?;
    Ok(v1 - 0.5 * m1 * xdot * xdot - m * xddot)
}

/// A background orbit X(tau) sampled on a uniform euclidean-time lattice.
#[derive(Debug, Clone)]
pub struct PathGrid {
    tau0: f64,
    dtau: f64,
    values: Vec<f64>,
}

impl PathGrid {
    pub fn new(tau0: f64, dtau: f64, values: Vec<f64>) -> Result<PathGrid> {
        if !(dtau.is_finite() && dtau > 0.0) {
            return Err(Error::NonPositiveStep { dtau });
        }
        if values.len() < 3 {
            return Err(Error::GridTooSmall { len: values.len(), min: 3 });
        }
        Ok(PathGrid { tau0, dtau, values })
    }

    /// Sample `f` at `n` uniform times starting at `tau0`.
    pub fn from_fn(tau0: f64, dtau: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<PathGrid> {
        let values = (0..n).map(|i| f(tau0 + dtau * i as f64)).collect();
        PathGrid::new(tau0, dtau, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.tau0 + self.dtau * i as f64
    }

    pub fn horizon(&self) -> f64 {
        self.dtau * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Second-order velocity estimates: central stencils inside, one-sided
    /// three-point stencils at the ends. Written in difference form so a
    /// constant path gives exact zeros.
    pub fn velocities(&self) -> Vec<f64> {
        let x = &self.values;
        let n = x.len();
        let h = self.dtau;
        let mut v = vec![0.0; n];
        v[0] = (4.0 * (x[1] - x[0]) - (x[2] - x[0])) / (2.0 * h);
        for i in 1..n - 1 {
            v[i] = (x[i + 1] - x[i - 1]) / (2.0 * h);
        }
        v[n - 1] = (4.0 * (x[n - 1] - x[n - 2]) - (x[n - 1] - x[n - 3])) / (2.0 * h);
        v
    }

    /// Second-order acceleration estimates; four-point one-sided stencils at
    /// the ends when the grid is long enough.
    pub fn accelerations(&self) -> Vec<f64> {
        let x = &self.values;
        let n = x.len();
        let h2 = self.dtau * self.dtau;
        let mut a = vec![0.0; n];
        for i in 1..n - 1 {
            a[i] = ((x[i + 1] - x[i]) - (x[i] - x[i - 1])) / h2;
        }
        if n >= 4 {
            a[0] = (2.0 * (x[0] - x[1]) - 3.0 * (x[1] - x[2]) + (x[2] - x[3])) / h2;
            a[n - 1] =
                (2.0 * (x[n - 1] - x[n - 2]) - 3.0 * (x[n - 2] - x[n - 3]) + (x[n - 3] - x[n - 4])) / h2;
        } else {
            a[0] = a[1];
            a[n - 1] = a[1];
        }
        a
    }

    pub fn check_in_domain(&self, spec: &ModelSpec) -> Result<()> {
        for &x in &self.values {
            spec.check_domain(x)?;
        }
        Ok(())
    }
}

/// Symmetric tridiagonal fluctuation kernel over the interior lattice points
/// (Dirichlet boundaries), stored with the step used to build it.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    dtau: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Dense row-major copy, mostly for tests and small inspections.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            out[i][i] = self.diag[i];
            if i + 1 < n {
                out[i][i + 1] = self.off[i];
                out[i + 1][i] = self.off[i];
            }
        }
        out
    }

    /// Congruence transform e K e with a diagonal matrix e.
    pub fn congruence(&self, e: &[f64]) -> KernelMatrix {
        assert_eq!(e.len(), self.dim());
        let diag = self.diag.iter().zip(e).map(|(d, s)| d * s * s).collect();
        let off = self
            .off
            .iter()
            .enumerate()
            .map(|(i, o)| o * e[i] * e[i + 1])
            .collect();
        KernelMatrix { dtau: self.dtau, diag, off }
    }

    /// Smallest `k` eigenvalues, ascending.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        tridiag::smallest_eigenvalues(&self.diag, &self.off, k)
    }
}

/// Edge data of the lattice action: midpoint masses and value jumps.
struct EdgeData {
    mass: Vec<f64>,
    mass_d1: Vec<f64>,
    mass_d2: Vec<f64>,
    jump: Vec<f64>,
}

fn edge_data(spec: &ModelSpec, path: &PathGrid) -> Result<EdgeData> {
    let x = path.values();
    let n = x.len();
    let mut mass = Vec::with_capacity(n - 1);
    let mut mass_d1 = Vec::with_capacity(n - 1);
    let mut mass_d2 = Vec::with_capacity(n - 1);
    let mut jump = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let mid = 0.5 * (x[k] + x[k + 1]);
        mass.push(spec.mass().eval(mid)?);
        mass_d1.push(spec.mass().deriv(1, mid)?);
        mass_d2.push(spec.mass().deriv(2, mid)?);
        jump.push(x[k + 1] - x[k]);
    }
    Ok(EdgeData { mass, mass_d1, mass_d2, jump })
}

/// Discrete Euler-Lagrange residual at the interior points: the exact
/// gradient of the lattice action divided by dtau. Agrees with
/// [`el_residual`] on smooth paths to O(dtau^2).
fn lattice_residuals(spec: &ModelSpec, path: &PathGrid, edges: &EdgeData) -> Result<Vec<f64>> {
    let x = path.values();
    let n = x.len();
    let dtau2 = path.dtau() * path.dtau();
    let mut res = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let l = i - 1; // left edge
        let r = i; // right edge
        let quad = (edges.mass_d1[r] * edges.jump[r] * edges.jump[r]
            + edges.mass_d1[l] * edges.jump[l] * edges.jump[l])
            / (4.0 * dtau2);
        let flux = (edges.mass[r] * edges.jump[r] - edges.mass[l] * edges.jump[l]) / dtau2;
        res.push(quad - flux + spec.potential().deriv(1, x[i])?);
    }
    Ok(res)
}

/// Covariant fluctuation kernel around `path`, with Dirichlet boundaries.
///
/// The matrix is the exact second-derivative matrix of the lattice action
/// (midpoint-mass nearest-neighbour kinetic term plus trapezoid potential),
/// divided by dtau, with the Christoffel correction -gamma(X) times the
/// discrete orbit residual subtracted on the diagonal. Entrywise it agrees
/// with the central-difference stencil of the continuum operator
/// -[m d^2/dtau^2 + m' Xdot d/dtau + m' Xddot + m'' Xdot^2/2 - V'']
/// to O(dtau^2), and being an exact Hessian it is symmetric and matches
/// numeric second differences of the lattice action to probe precision.
pub fn hessian_kernel(spec: &ModelSpec, path: &PathGrid) -> Result<KernelMatrix> {
    path.check_in_domain(spec)?;
    let x = path.values();
    let n = x.len();
    let dtau = path.dtau();
    let dtau2 = dtau * dtau;
    let edges = edge_data(spec, path)?;
    let residuals = lattice_residuals(spec, path, &edges)?;

    let mut diag = Vec::with_capacity(n - 2);
    let mut off = Vec::with_capacity(n.saturating_sub(3));
    for i in 1..n - 1 {
        let l = i - 1;
        let r = i;
        let m = spec.mass_at(x[i])?;
        let gamma = spec.mass().deriv(1, x[i])? / (2.0 * m);
        let kinetic = (edges.mass[r] + edges.mass[l]) / dtau2
            + (edges.mass_d2[r] * edges.jump[r] * edges.jump[r]
                + edges.mass_d2[l] * edges.jump[l] * edges.jump[l])
                / (8.0 * dtau2)
            + (edges.mass_d1[l] * edges.jump[l] - edges.mass_d1[r] * edges.jump[r]) / dtau2;
        let v2 = spec.potential().deriv(2, x[i])?;
        diag.push(kinetic + v2 - gamma * residuals[i - 1]);
        if i + 1 < n - 1 {
            off.push(edges.mass_d2[r] * edges.jump[r] * edges.jump[r] / (8.0 * dtau2)
                - edges.mass[r] / dtau2);
        }
    }
    Ok(KernelMatrix { dtau, diag, off })
}

/// Einbein-transformed kernel: -d^2/dtau^2 + Omega^2(X(tau)) on the interior
/// points. Exactly symmetric tridiagonal; congruent to the raw kernel
/// through the diagonal einbein up to O(dtau^2) in the spectrum.
pub fn transformed_kernel(spec: &ModelSpec, path: &PathGrid) -> Result<KernelMatrix> {
    path.check_in_domain(spec)?;
    let x = path.values();
    let n = x.len();
    let dtau = path.dtau();
    let dtau2 = dtau * dtau;
    let mut diag = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        diag.push(2.0 / dtau2 + omega_sq(spec, x[i])?);
    }
    let off = vec![-1.0 / dtau2; n.saturating_sub(3)];
    Ok(KernelMatrix { dtau, diag, off })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: &str, v: &str) -> ModelSpec {
        ModelSpec::parse(m, v, 1.0, (-5.0, 5.0)).unwrap()
    }

    #[test]
    fn christoffel_known_values() {
        let s = spec("1", "0.5*x^2");
        assert_eq!(christoffel(&s, 0.7).unwrap(), 0.0);

        // m = exp(2x): m'/2m = 1 everywhere
        let s = spec("exp(2*x)", "0");
        assert!((christoffel(&s, 0.3).unwrap() - 1.0).abs() < 1.0e-12);

        // m = 1 + x^2 at x = 1: 2x / 2(1+x^2) = 0.5
        let s = spec("1+x^2", "0");
        assert!((christoffel(&s, 1.0).unwrap() - 0.5).abs() < 1.0e-12);
    }

    #[test]
    fn einbein_is_covariantly_constant() {
        // h' - gamma h = 0, checked with the structural derivative of sqrt(m)
        for m_src in ["exp(2*x)", "1+x^2", "2+sin(x)"] {
            let s = spec(m_src, "0");
            let h_expr = Expr::Call(UnaryFn::Sqrt, Box::new(s.mass().expr().clone()));
            let h_prime = h_expr.derivative();
            for k in 0..9 {
                let x = -1.0 + 0.25 * f64::from(k);
                let defect =
                    h_prime.eval(x).unwrap() - christoffel(&s, x).unwrap() * einbein(&s, x).unwrap();
                assert!(defect.abs() <= 1.0e-10, "{m_src} at {x}: {defect}");
            }
        }
        let s = spec("1+x^2", "0");
        assert!((einbein(&s, 1.0).unwrap() - 2.0f64.sqrt()).abs() < 1.0e-15);
    }

    #[test]
    fn omega_sq_known_values() {
        // constant-mass harmonic: V = 2 x^2 has V'' = 4
        let s = spec("1", "2*x^2");
        assert_eq!(omega_sq(&s, 0.9).unwrap(), 4.0);

        // m = 1+x^2, V = x^2/2: Omega^2 = 1/(1+x^2)^2
        let s = spec("1+x^2", "0.5*x^2");
        assert!((omega_sq(&s, 1.0).unwrap() - 0.25).abs() < 1.0e-14);
        assert!((omega_sq(&s, 0.0).unwrap() - 1.0).abs() < 1.0e-14);

        // negative values are representable
        let s = spec("exp(2*x)", "x");
        assert!((omega_sq(&s, 0.0).unwrap() + 1.0).abs() < 1.0e-14);
    }

    #[test]
    fn omega_sq_routes_agree() {
        let cases = [
            ("1", "2*x^2"),
            ("1+x^2", "0.5*x^2"),
            ("exp(2*x)", "cosh(x)"),
            ("2+sin(x)", "0.5*x^2"),
        ];
        for (m, v) in cases {
            let s = spec(m, v);
            for k in 0..41 {
                let x = -1.0 + 0.05 * f64::from(k);
                let a = omega_sq(&s, x).unwrap();
                let b = omega_sq_lb(&s, x).unwrap();
                if a.abs() > 1.0e-12 {
                    assert!(
                        ((a - b) / a).abs() <= 1.0e-10,
                        "{m}, {v} at {x}: {a} vs {b}"
                    );
                }
            }
        }
        // flat metric: the Laplace-Beltrami route reduces to V''
        let s = spec("1", "sinh(x)");
        assert!((omega_sq_lb(&s, 0.4).unwrap() - 0.4f64.sinh()).abs() < 1.0e-12);
    }

    #[test]
    fn omega_sq_expr_matches_pointwise() {
        let s = spec("1+x^2", "0.5*x^2");
        let w = omega_sq_expr(&s);
        for k in 0..11 {
            let x = -1.0 + 0.2 * f64::from(k);
            let a = w.eval(x).unwrap();
            let b = omega_sq(&s, x).unwrap();
            assert!((a - b).abs() <= 1.0e-13 * b.abs().max(1.0));
        }
    }

    #[test]
    fn el_residual_known_cases() {
        let s = spec("1", "0");
        assert_eq!(el_residual(&s, 0.3, 2.0, 0.0).unwrap(), 0.0);

        // euclidean harmonic: Xddot = omega^2 X with V = 2 x^2
        let s = spec("1", "2*x^2");
        assert!(el_residual(&s, 1.0, 0.0, 4.0).unwrap().abs() < 1.0e-14);

        let s = spec("1+x^2", "0.5*x^2");
        assert!(el_residual(&s, 1.0, 1.0, 0.0).unwrap().abs() < 1.0e-14);
    }

    #[test]
    fn constant_coefficient_kernel_is_standard() {
        let s = spec("1", "2*x^2");
        let path = PathGrid::from_fn(-1.0, 0.25, 9, |_| 0.0).unwrap();
        let k = hessian_kernel(&s, &path).unwrap();
        let h2 = 0.25 * 0.25;
        for d in k.diag() {
            assert!((d - (2.0 / h2 + 4.0)).abs() < 1.0e-12);
        }
        for o in k.off() {
            assert!((o + 1.0 / h2).abs() < 1.0e-12);
        }
        // einbein = 1: transformed kernel is the same matrix
        let t = transformed_kernel(&s, &path).unwrap();
        for (a, b) in k.diag().iter().zip(t.diag()) {
            assert!((a - b).abs() < 1.0e-12);
        }
    }

    #[test]
    fn transformed_kernel_uses_frequency_scalar() {
        let s = spec("1+x^2", "0.5*x^2");
        let path = PathGrid::from_fn(0.0, 0.1, 11, |_| 1.0).unwrap();
        let t = transformed_kernel(&s, &path).unwrap();
        for d in t.diag() {
            assert!((d - (2.0 / 0.01 + 0.25)).abs() < 1.0e-10);
        }
    }

    #[test]
    fn dirichlet_spectrum_of_harmonic_kernel() {
        // lowest eigenvalue of -d^2 + 1 on [-10, 10]: (pi/T)^2 + 1
        let s = spec("1", "0.5*x^2");
        let n = 2000;
        let dtau = 20.0 / (n as f64 - 1.0);
        let path = PathGrid::from_fn(-10.0, dtau, n, |_| 0.0).unwrap();
        let t = transformed_kernel(&s, &path).unwrap();
        let lowest = t.smallest_eigenvalues(1)[0];
        let exact = (std::f64::consts::PI / 20.0).powi(2) + 1.0;
        assert!(
            ((lowest - exact) / exact).abs() <= 1.0e-3,
            "lowest {lowest} vs {exact}"
        );
    }

    /// Independent oracle: the lattice action evaluated from nothing but
    /// m and V values, differenced numerically.
    fn lattice_action(spec: &ModelSpec, x: &[f64], dtau: f64) -> f64 {
        let n = x.len();
        let mut a = 0.0;
        for k in 0..n - 1 {
            let mid = 0.5 * (x[k] + x[k + 1]);
            let jump = x[k + 1] - x[k];
            a += 0.5 * spec.mass().eval(mid).unwrap() * jump * jump / dtau;
        }
        for (i, &xi) in x.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 * dtau } else { dtau };
            a += w * spec.potential().eval(xi).unwrap();
        }
        a
    }

    #[test]
    fn kernel_matches_numeric_hessian_of_lattice_action() {
        let s = spec("1+x^2", "0.5*x^2");
        let n = 24;
        let dtau = 0.12;
        let path = PathGrid::from_fn(-1.38, dtau, n, |t| 0.5 * (t * 0.9).tanh()).unwrap();
        let k = hessian_kernel(&s, &path).unwrap();
        let dense = k.to_dense();

        let x0 = path.values().to_vec();
        let eta = 1.0e-4;
        let dim = n - 2;
        let mut max_entry: f64 = 0.0;
        for row in &dense {
            for v in row {
                max_entry = max_entry.max(v.abs());
            }
        }

        let mut max_err: f64 = 0.0;
        for i in 0..dim {
            // gradient for the Christoffel correction
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[i + 1] += eta;
            xm[i + 1] -= eta;
            let grad = (lattice_action(&s, &xp, dtau) - lattice_action(&s, &xm, dtau)) / (2.0 * eta);
            let gamma = christoffel(&s, x0[i + 1]).unwrap();

            for j in i..dim {
                let numeric = if i == j {
                    let center = lattice_action(&s, &x0, dtau);
                    (lattice_action(&s, &xp, dtau) - 2.0 * center + lattice_action(&s, &xm, dtau))
                        / (eta * eta)
                } else {
                    let mut xpp = x0.clone();
                    let mut xpm = x0.clone();
                    let mut xmp = x0.clone();
                    let mut xmm = x0.clone();
                    xpp[i + 1] += eta;
                    xpp[j + 1] += eta;
                    xpm[i + 1] += eta;
                    xpm[j + 1] -= eta;
                    xmp[i + 1] -= eta;
                    xmp[j + 1] += eta;
                    xmm[i + 1] -= eta;
                    xmm[j + 1] -= eta;
                    (lattice_action(&s, &xpp, dtau) - lattice_action(&s, &xpm, dtau)
                        - lattice_action(&s, &xmp, dtau)
                        + lattice_action(&s, &xmm, dtau))
                        / (4.0 * eta * eta)
                };
                let mut oracle = numeric / dtau;
                if i == j {
                    oracle -= gamma * grad / dtau;
                }
                max_err = max_err.max((dense[i][j] - oracle).abs());
            }
        }
        assert!(
            max_err / max_entry <= 1.0e-6,
            "normalized defect {:.3e}",
            max_err / max_entry
        );
    }
}
