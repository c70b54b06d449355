// SPDX-License-Identifier: Apache-2.0

//! Cathodoluminescence of an electron-beam-driven multi-level emitter:
//! master-equation dynamics in a vectorized operator basis, two-time
//! correlators by quantum regression, and the time-dependent filtered
//! emission spectrum.

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rk;
pub mod spectrum;

pub use correlations::{regression_seed, two_time_correlations, CorrelationSlice, RegressionSeed, TauGrid};
pub use dynamics::{propagate, steady_state, uniform_grid, Propagator, Trajectory};
pub use error::{Error, Result};
pub use linalg::matrix_exponential;
pub use model::{
    build_liouvillian, build_model, initial_state, EmitterModel, InitialState, Liouvillian, ModelParams, StateVector,
};
pub use spectrum::{
    coherence_ratio, gamma_matrix, interference_contribution, quadrature_spectrum, relative_intensity, spectrum_auto,
    spectrum_eigen, spectrum_quadrature, EmissionKernel, Route, SpectrumConfig, SpectrumGrid,
};
