// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use clsim::{
    build_liouvillian, build_model, initial_state, EmitterModel, InitialState, Liouvillian, ModelParams, StateVector,
};

/// Three excited levels, ω₂₁ = 50, full interference.
pub fn split_model() -> EmitterModel {
    build_model(&ModelParams::v_system(50.0, 0.05, 1.0, 5.0, 1.0, 3.0)).expect("valid parameters")
}

pub fn fixture() -> (EmitterModel, Liouvillian, StateVector) {
    let m = split_model();
    let l = build_liouvillian(&m);
    let psi0 = initial_state(&InitialState::ground(), m.levels()).expect("ground state");
    (m, l, psi0)
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}
