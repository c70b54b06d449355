// SPDX-License-Identifier: Apache-2.0

//! Exact propagation of Ψ(t) under the constant generator, and the steady
//! state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix_exponential;
use crate::model::{basis_position, Liouvillian, StateVector};

/// `exp(M Δt)` for a fixed step.
#[derive(Debug, Clone)]
pub struct Propagator {
    step: f64,
    matrix: DMatrix<Complex64>,
    levels: usize,
}

impl Propagator {
    pub fn new(l: &Liouvillian, step: f64) -> Result<Self> {
        let matrix = matrix_exponential(&(l.matrix() * Complex64::from(step)))?;
        Ok(Propagator {
            step,
            matrix,
            levels: l.levels(),
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector::from_entries(self.levels, &self.matrix * psi.entries())
    }
}

/// States sampled on a monotone time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn levels(&self) -> usize {
        self.states[0].levels()
    }

    /// `ρ_ii(t)` over the grid.
    pub fn population(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.rho(i, i).re).collect()
    }

    /// `|ρ_ij(t)|` over the grid.
    pub fn coherence(&self, i: usize, j: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.rho(i, j).norm()).collect()
    }

    /// Step of the grid if it is uniform to within `1e-9` relative.
    pub fn uniform_step(&self) -> Option<f64> {
        uniform_step(&self.times)
    }
}

pub(crate) fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if h <= 0.0 {
        return None;
    }
    let ok = times
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - (times[0] + k as f64 * h)).abs() <= 1e-9 * h.max(t.abs()));
    ok.then_some(h)
}

/// Uniform grid `start, start + h, ..., start + (n - 1) h`.
pub fn uniform_grid(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| start + k as f64 * step).collect()
}

/// `Ψ(t_k) = exp(M t_k) Ψ(0)` for every grid point.
pub fn propagate(l: &Liouvillian, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
    if times.is_empty() {
        return Err(Error::GridMismatch("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::GridMismatch(
            "time grid must start at t >= 0 and be nondecreasing".into(),
        ));
    }
    let mut states = Vec::with_capacity(times.len());
    let first = if times[0] == 0.0 {
        psi0.clone()
    } else {
        Propagator::new(l, times[0])?.apply(psi0)
    };
    states.push(first);

    if let Some(h) = uniform_step(times) {
        let p = Propagator::new(l, h)?;
        for _ in 1..times.len() {
            let next = p.apply(states.last().unwrap());
            states.push(next);
        }
    } else {
        for w in times.windows(2) {
            let dt = w[1] - w[0];
            let next = if dt == 0.0 {
                states.last().unwrap().clone()
            } else {
                Propagator::new(l, dt)?.apply(states.last().unwrap())
            };
            states.push(next);
        }
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Relative threshold below which a singular value counts as zero.
const KERNEL_TOLERANCE: f64 = 1e-9;

/// The trace-one null vector of `M`.
pub fn steady_state(l: &Liouvillian) -> Result<StateVector> {
    let m = l.matrix();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sv = &svd.singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return Err(Error::DegenerateKernel(m.ncols()));
    }
    let threshold = KERNEL_TOLERANCE * largest;
    let zeros = sv.iter().filter(|&&s| s <= threshold).count();
    if zeros > 1 {
        return Err(Error::DegenerateKernel(zeros));
    }
    let (k, &smallest) = sv.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    if zeros == 0 {
        return Err(Error::NoSteadyState(smallest));
    }
    // rows of V^T are conjugated right singular vectors
    let mut v = v_t.row(k).adjoint();
    let levels = l.levels();
    let trace: Complex64 = (0..levels).map(|i| v[basis_position(levels, i, i)]).sum();
    if trace.norm() < 1e-12 {
        return Err(Error::NoSteadyState(smallest));
    }
    v /= trace;
    Ok(StateVector::from_entries(levels, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_liouvillian, build_model, initial_state, InitialState, ModelParams};
    use approx::assert_relative_eq;

    fn two_level(r: f64) -> Liouvillian {
        build_liouvillian(&build_model(&ModelParams::two_level(0.0, 1.0, r)).unwrap())
    }

    #[test]
    fn zero_time_is_identity() {
        let l = two_level(5.0);
        let psi0 = initial_state(&InitialState::excited(1), 2).unwrap();
        let traj = propagate(&l, &psi0, &[0.0]).unwrap();
        assert_eq!(traj.states()[0], psi0);
    }

    #[test]
    fn free_decay() {
        let l = two_level(0.0);
        let psi0 = initial_state(&InitialState::excited(1), 2).unwrap();
        let traj = propagate(&l, &psi0, &uniform_grid(0.0, 0.01, 201)).unwrap();
        let pop = traj.population(1);
        assert_relative_eq!(pop[100], (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(pop[100], 0.367879441171, epsilon = 1e-11);
    }

    #[test]
    fn nonuniform_grid_matches_uniform() {
        let l = two_level(2.0);
        let psi0 = initial_state(&InitialState::excited(1), 2).unwrap();
        let t = [0.0, 0.1, 0.35, 1.0, 1.0, 2.5];
        let a = propagate(&l, &psi0, &t).unwrap();
        for (k, &tk) in t.iter().enumerate() {
            let b = propagate(&l, &psi0, &[tk]).unwrap();
            let d = (a.states()[k].entries() - b.states()[0].entries()).camax();
            assert!(d < 1e-13);
        }
        assert!(propagate(&l, &psi0, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn semigroup() {
        let m = build_model(&ModelParams::v_system(0.05, 0.05, 1.0, 5.0, 1.0, 3.0)).unwrap();
        let l = build_liouvillian(&m);
        let p1 = Propagator::new(&l, 0.37).unwrap();
        let p2 = Propagator::new(&l, 0.74).unwrap();
        let sq = p1.matrix() * p1.matrix();
        assert!((sq - p2.matrix()).camax() < 1e-10);
    }

    #[test]
    fn two_level_steady_state() {
        let ss = steady_state(&two_level(5.0)).unwrap();
        assert_relative_eq!(ss.rho(1, 1).re, 5.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(ss.rho(1, 1).re, 0.454545, epsilon = 1e-6);
    }

    #[test]
    fn closed_system_has_degenerate_kernel() {
        let mut p = ModelParams::v_system(0.3, 0.7, 0.0, 0.0, 0.0, 0.0);
        p.omega = vec![1.0, 2.0, 3.5];
        let l = build_liouvillian(&build_model(&p).unwrap());
        assert!(matches!(steady_state(&l), Err(Error::DegenerateKernel(4))));
    }
}
