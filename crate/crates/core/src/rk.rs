// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integrator for complex linear and
//! nonlinear systems. Used as an independent check on exact propagation.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

type CVec = DVector<Complex64>;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A; these are 5th minus 4th.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` and return `y` at each output
/// time (which must be nondecreasing and `>= t0`).
pub fn integrate<F>(mut f: F, t0: f64, y0: &CVec, outputs: &[f64], tol: Tolerance) -> Result<Vec<CVec>>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    let mut h = 1e-3;
    let mut out = Vec::with_capacity(outputs.len());

    for &target in outputs {
        if target < t - 1e-14 {
            return Err(Error::GridMismatch("output times must be nondecreasing".into()));
        }
        let mut steps = 0usize;
        while t < target - 1e-15 * target.abs().max(1.0) {
            steps += 1;
            if steps > 10_000_000 {
                return Err(Error::ConvergenceFailure("too many integrator steps".into()));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };

            let mut k: Vec<CVec> = Vec::with_capacity(7);
            k.push(k1.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (r, kr) in k.iter().enumerate() {
                    let a = A[s][r];
                    if a != 0.0 {
                        ys.axpy(Complex64::from(step * a), kr, Complex64::from(1.0));
                    }
                }
                k.push(f(t + C[s] * step, &ys));
            }
            // FSAL: stage 7 is evaluated at the 5th-order solution
            let mut y_new = y.clone();
            for (r, kr) in k.iter().take(6).enumerate() {
                let a = A[6][r];
                if a != 0.0 {
                    y_new.axpy(Complex64::from(step * a), kr, Complex64::from(1.0));
                }
            }
            let mut err = 0.0f64;
            for i in 0..y.len() {
                let mut e = Complex64::new(0.0, 0.0);
                for (r, kr) in k.iter().enumerate() {
                    e += kr[i] * E[r];
                }
                let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max((e * step).norm() / sc);
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k.pop().unwrap();
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h < 1e-14 {
                return Err(Error::ConvergenceFailure("step size underflow".into()));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
