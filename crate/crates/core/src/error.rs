use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 2 samples per axis (got nt={nt}, nx={nx}, ny={ny})")]
    TooFewSamples { nt: usize, nx: usize, ny: usize },
    #[error("spacings must be positive and finite (got dx={dx}, dy={dy})")]
    BadSpacing { dx: f64, dy: f64 },
    #[error("grid {nt}x{nx}x{ny} does not fit in addressable memory")]
    TooLarge { nt: usize, nx: usize, ny: usize },
    #[error("fields live on different grids")]
    Mismatch,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("field contains a non-finite value at flat index {index}")]
    NonFinite { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoissonError {
    #[error("penalty parameter r must be positive (got {0})")]
    BadPenalty(f64),
    #[error("boundary density must be nonnegative (min {min})")]
    NegativeDensity { min: f64 },
    #[error("right-hand side is incompatible with the operator null space (relative defect {defect:.3e})")]
    Incompatible { defect: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("{term}: field must be nonnegative (min {min} at spatial index {index})")]
    Negative { term: &'static str, min: f64, index: usize },
    #[error("{term}: expected a {nx}x{ny} spatial field")]
    Shape { term: &'static str, nx: usize, ny: usize },
    #[error("density lower bound exceeds upper bound at spatial index {index} ({lower} > {upper})")]
    EmptyBox { index: usize, lower: f64, upper: f64 },
    #[error("fixed-density regions overlap with different values at spatial index {index}")]
    FixedOverlap { index: usize },
    #[error("fixed density {value} violates the density bounds [{lower}, {upper}] at spatial index {index}")]
    FixedOutsideBounds { index: usize, value: f64, lower: f64, upper: f64 },
    #[error("step parameter s must be positive (got {0})")]
    BadStep(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    /// `warnings` repeats the step-size warnings of the run, which usually
    /// explain the blow-up.
    #[error("non-finite value in {field} at iteration {iteration}{}", warning_suffix(.warnings))]
    NonFinite { iteration: usize, field: &'static str, warnings: Vec<String> },
    #[error("invalid parameter {name} = {value}: {reason}")]
    BadParameter { name: &'static str, value: f64, reason: &'static str },
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn warning_suffix(warnings: &[String]) -> String {
    if warnings.is_empty() {
        String::new()
    } else {
        format!(" ({})", warnings.join("; "))
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("mass mismatch: rho0 has mass {mass0}, rho1 has mass {mass1} (relative difference {rel:.3e})")]
    MassMismatch { mass0: f64, mass1: f64, rel: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl OutputError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OutputError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        OutputError::Format { path: path.into(), reason: reason.into() }
    }
}
