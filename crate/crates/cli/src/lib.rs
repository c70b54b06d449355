// SPDX-License-Identifier: Apache-2.0

//! Experiment runner: JSON configs and embedded presets in, CSV spectra,
//! trajectories and a provenance sidecar out.

pub mod app;
pub mod config;
pub mod error;
pub mod format;
pub mod presets;
pub mod runner;

pub use config::{parse_config, ExperimentConfig, Mode, RouteChoice};
pub use error::{CliError, Result};
pub use runner::{execute, load, run, validate, Artifact, RunOptions};
