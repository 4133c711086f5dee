// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:.3e}")]
    NonHermitianInput { row: usize, col: usize, deviation: f64 },

    #[error("invalid dimension {0}: operators must be at least 2x2")]
    InvalidDimension(usize),

    #[error("malformed input: {field}: {reason}")]
    Malformed { field: String, reason: String },

    #[error("bound radicand 2*h0 + 4*h01 - 1 = {0:.6e} is negative; the system is too poorly confined")]
    RadicandNegative(f64),

    #[error("peak heights out of range: h0 = {h0}, h01 = {h01}")]
    OutOfRangePeaks { h0: f64, h01: f64 },

    #[error("unknown Hamiltonian family `{0}`")]
    UnknownFamily(String),

    #[error("time samples are not uniformly spaced at index {index}")]
    NonUniformSampling { index: usize },

    #[error("trace too short: {have} samples, need at least {need}")]
    TooShort { have: usize, need: usize },

    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),

    #[error("resolvent (A - i w I) is singular at w = {0}")]
    SingularResolvent(f64),

    #[error("Lorentzian approximation invalid: d = {gap} is not > {factor} x max rate {max_rate}")]
    RegimeViolation { gap: f64, max_rate: f64, factor: f64 },

    #[error("target leakage {0} must lie strictly between 0 and 1/2")]
    DegenerateTarget(f64),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
