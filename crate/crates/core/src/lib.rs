//! One-loop quantum corrections for a 1-D particle with coordinate-dependent
//! mass m(x) in a potential V(x), in euclidean time.
//!
//! The crate evaluates the gradient-expansion corrections (effective
//! potential and kinetic coefficient), validates them against exact
//! functional-determinant evaluations on a finite horizon, integrates the
//! classical and quantum-corrected orbits, and asserts every covariance
//! property under coordinate changes as an executable check.

pub mod covariant;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod expr;
pub mod model;
pub mod reparam;
pub mod tracelog;
pub mod tridiag;

pub use error::{Error, Result};
pub use expr::{parse_expression, Expr};
pub use model::{Function1D, ModelSpec};
