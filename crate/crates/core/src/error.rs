//! Error types shared across the crate.

use thiserror::Error;

/// Kind of a parse failure, reported together with a 1-based column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed input (unexpected token, unbalanced parentheses, bad number).
    Syntax(String),
    /// An identifier that is neither `x` nor a known function name.
    UnknownIdentifier(String),
    /// A function called with the wrong number of arguments.
    ArityMismatch { function: String, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at column {column}: {}", kind_message(kind))]
    Parse { kind: ParseErrorKind, column: usize },

    #[error("derivative order {order} out of range (0..=4)")]
    DerivativeOrder { order: u32 },

    #[error("division by zero while evaluating at x = {x}")]
    DivisionByZero { x: f64 },

    #[error("log of non-positive argument {arg} while evaluating at x = {x}")]
    LogDomain { x: f64, arg: f64 },

    #[error("sqrt of negative argument {arg} while evaluating at x = {x}")]
    SqrtDomain { x: f64, arg: f64 },

    #[error("non-finite value while evaluating at x = {x}")]
    NonFinite { x: f64 },

    #[error("x = {x} outside domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid domain [{lo}, {hi}]: bounds must be finite with lo < hi")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("hbar = {hbar} must be finite and non-negative")]
    InvalidHbar { hbar: f64 },

    #[error("mass m({x}) = {mass} is not positive")]
    NonPositiveMass { x: f64, mass: f64 },

    #[error("covariant frequency squared {omega_sq} at x = {x} is not positive")]
    NonPositiveFrequency { x: f64, omega_sq: f64 },

    #[error("grid of {len} points is too small (need at least {min})")]
    GridTooSmall { len: usize, min: usize },

    #[error("step dtau = {dtau} must be positive and finite")]
    NonPositiveStep { dtau: f64 },

    #[error("time horizon {horizon} must be positive")]
    NonPositiveHorizon { horizon: f64 },

    #[error("reference frequency squared {omega0_sq} must be positive")]
    NonPositiveReference { omega0_sq: f64 },

    #[error("frequency squared {omega_sq} must be positive for the momentum integral")]
    NonPositiveMomentumFrequency { omega_sq: f64 },

    #[error("lattice operator not positive definite: pivot {pivot} at index {index}")]
    NonPositivePivot { index: usize, pivot: f64 },

    #[error("determinant ratio undefined: Gelfand-Yaglom solution reached {value}")]
    NonPositiveDeterminant { value: f64 },

    #[error("profile endpoints deviate from the reference by {defect} (allowed {tol})")]
    EndpointMismatch { defect: f64, tol: f64 },

    #[error("coordinate map is not monotone near y = {y}")]
    NonMonotoneMap { y: f64 },

    #[error("value {x} lies outside the coordinate map image [{lo}, {hi}]")]
    OutsideMapImage { x: f64, lo: f64, hi: f64 },

    #[error("orbit left the domain at tau = {tau}")]
    DomainExit { tau: f64 },

    #[error("internal assertion failed: {what}")]
    Internal { what: String },
}

fn kind_message(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => msg.clone(),
        ParseErrorKind::UnknownIdentifier(name) => format!("unknown identifier `{name}`"),
        ParseErrorKind::ArityMismatch { function, expected, got } => {
            format!("function `{function}` takes {expected} argument(s), got {got}")
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
