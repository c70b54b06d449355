// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// The parameter sets behind every shipped preset.
pub fn preset_params() -> Vec<(&'static str, clsim::ModelParams)> {
    use clsim::ModelParams as P;
    let mut out = vec![
        ("near-degenerate p=1", P::v_system(0.05, 0.05, 1.0, 5.0, 1.0, 3.0)),
        ("near-degenerate p=0", P::v_system(0.05, 0.05, 1.0, 5.0, 0.0, 3.0)),
        ("split p=1", P::v_system(50.0, 0.05, 1.0, 5.0, 1.0, 3.0)),
        ("split p=0", P::v_system(50.0, 0.05, 1.0, 5.0, 0.0, 3.0)),
        ("wide split p=1", P::v_system(100.0, 0.05, 1.0, 5.0, 1.0, 3.0)),
        ("wide split p=0", P::v_system(100.0, 0.05, 1.0, 5.0, 0.0, 3.0)),
        ("doubly split p=1", P::v_system(50.0, 50.0, 1.0, 5.0, 1.0, 3.0)),
    ];
    for r in [0.5, 1.0] {
        out.push(("pump scan p=1", P::v_system(50.0, 0.05, 1.0, r, 1.0, 3.0)));
        out.push(("pump scan p=0", P::v_system(50.0, 0.05, 1.0, r, 0.0, 3.0)));
    }
    out
}
