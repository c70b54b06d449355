// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised while building models or running the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative rate in `{field}`: {value}")]
    NegativeRate { field: String, value: f64 },

    #[error("interference parameter p = {0} lies outside [-1, 1]")]
    InterferenceOutOfRange(f64),

    #[error("pump rate matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.6e})")]
    PumpMatrixNotPsd { min_eigenvalue: f64 },

    #[error("invalid nonradiative channel ({upper} -> {lower}) for {n_excited} excited levels")]
    BadChannel {
        upper: usize,
        lower: usize,
        n_excited: usize,
    },

    #[error("`{field}` has length {found}, expected {expected}")]
    LengthMismatch {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("model needs at least one excited level")]
    NoExcitedLevels,

    #[error("non-finite value in `{0}`")]
    NonFinite(String),

    #[error("initial state is not normalized (sum |c|^2 = {0})")]
    NotNormalized(f64),

    #[error("unknown initial state `{0}`")]
    UnknownInitialState(String),

    #[error("level index {index} out of range for {levels} levels")]
    IndexOutOfRange { index: usize, levels: usize },

    #[error("matrix exponential failed: {0}")]
    ConvergenceFailure(String),

    #[error("steady state is not unique: kernel dimension {0}")]
    DegenerateKernel(usize),

    #[error("no steady state: smallest singular value {0:.3e} is not separated from the rest")]
    NoSteadyState(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature step h = {step} too coarse; need h <= {limit:.3e}")]
    GridTooCoarse { step: f64, limit: f64 },

    #[error("eigenbasis of the generator is ill-conditioned (condition number {0:.3e})")]
    IllConditionedEigenbasis(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
