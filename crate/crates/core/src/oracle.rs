// SPDX-License-Identifier: Apache-2.0

//! Independent reference for the dynamics: dρ/dt written operator by
//! operator on the density matrix, never forming the vectorized generator,
//! and integrated with the adaptive Runge–Kutta scheme.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::model::EmitterModel;
use crate::rk::{integrate, Tolerance};

type CMat = DMatrix<Complex64>;

fn ket_bra(levels: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(levels, levels);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

fn anti(a: &CMat, rho: &CMat) -> CMat {
    a * rho + rho * a
}

/// `L ρ L† - ½{L†L, ρ}`.
fn lindblad(l: &CMat, rho: &CMat) -> CMat {
    let ld = l.adjoint();
    l * rho * &ld - anti(&(&ld * l), rho) * Complex64::new(0.5, 0.0)
}

/// dρ/dt of the pumped multi-level emitter. Linear in ρ, so it also
/// evolves the non-Hermitian operators of the regression theorem.
#[derive(Debug, Clone)]
pub struct DirectRhs {
    levels: usize,
    h: CMat,
    terms: Vec<(f64, CMat)>,
    cross: Vec<(f64, CMat, CMat)>,
}

impl DirectRhs {
    pub fn new(m: &EmitterModel) -> Self {
        let levels = m.levels();
        let n = m.n_excited();
        let mut h = CMat::zeros(levels, levels);
        for i in 1..=n {
            h[(i, i)] = Complex64::new(m.omega()[i - 1], 0.0);
        }
        let mut terms = Vec::new();
        for i in 1..=n {
            let g = m.gamma_rad()[i - 1];
            let r = m.excitation()[i - 1];
            terms.push((g + r, ket_bra(levels, 0, i)));
            terms.push((r, ket_bra(levels, i, 0)));
        }
        for ch in m.channels() {
            terms.push((ch.rate, ket_bra(levels, ch.lower, ch.upper)));
        }
        let mut cross = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    cross.push((m.cross_rate(i, j), ket_bra(levels, i, 0), ket_bra(levels, 0, j)));
                }
            }
        }
        DirectRhs {
            levels,
            h,
            terms,
            cross,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mi = Complex64::new(0.0, -1.0);
        let mut d = (&self.h * rho - rho * &self.h) * mi;
        for (rate, l) in &self.terms {
            d += lindblad(l, rho) * Complex64::new(*rate, 0.0);
        }
        for (rate, sp, sm) in &self.cross {
            // -r_ij (½{S⁺ᵢS⁻ⱼ + S⁻ⱼS⁺ᵢ, ρ} - S⁻ⱼ ρ S⁺ᵢ - S⁺ᵢ ρ S⁻ⱼ)
            let x = sp * sm + sm * sp;
            let t = anti(&x, rho) * Complex64::new(0.5, 0.0) - sm * rho * sp - sp * rho * sm;
            d -= t * Complex64::new(*rate, 0.0);
        }
        d
    }

    /// `ρ(t)` at each output time, starting from `rho0` at t = 0.
    pub fn integrate(&self, rho0: &CMat, times: &[f64], tol: Tolerance) -> Result<Vec<CMat>> {
        let n = self.levels;
        let ys = integrate(|_, y| flat(&self.apply(&unflat(n, y))), 0.0, &flat(rho0), times, tol)?;
        Ok(ys.iter().map(|y| unflat(n, y)).collect())
    }
}

/// Flatten row-major.
pub fn flat(m: &CMat) -> DVector<Complex64> {
    DVector::from_iterator(m.len(), m.transpose().iter().cloned())
}

pub fn unflat(levels: usize, v: &DVector<Complex64>) -> CMat {
    CMat::from_row_slice(levels, levels, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let m = CMat::from_fn(3, 3, |a, b| Complex64::new(a as f64, b as f64));
        let v = flat(&m);
        assert_eq!(v[1], Complex64::new(0.0, 1.0));
        assert_eq!(unflat(3, &v), m);
    }
}
