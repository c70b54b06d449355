// SPDX-License-Identifier: Apache-2.0

//! Two-time averages `⟨A_ij(t₂+τ) A_mn(t₂)⟩` by the quantum regression
//! theorem: the vector `Y^{mn}(t₂, τ)` obeys the same equation as Ψ in τ,
//! starting from `Y^{mn}(t₂, 0) = T^{mn} Ψ(t₂)`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{Propagator, Trajectory};
use crate::error::{Error, Result};
use crate::model::{basis_labels, basis_position, Liouvillian, StateVector};

/// The map `Ψ(t₂) ↦ Y^{mn}(t₂, 0)` from `A_ij A_mn = δ_jm A_in`.
#[derive(Debug, Clone)]
pub struct RegressionSeed {
    m: usize,
    n: usize,
    levels: usize,
    /// `(row, column)` of every unit entry.
    pairs: Vec<(usize, usize)>,
}

pub fn regression_seed(m: usize, n: usize, levels: usize) -> Result<RegressionSeed> {
    for idx in [m, n] {
        if idx >= levels {
            return Err(Error::IndexOutOfRange { index: idx, levels });
        }
    }
    let pairs = basis_labels(levels)
        .into_iter()
        .filter(|&(_, j)| j == m)
        .map(|(i, j)| (basis_position(levels, i, j), basis_position(levels, i, n)))
        .collect();
    Ok(RegressionSeed { m, n, levels, pairs })
}

impl RegressionSeed {
    pub fn indices(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Dense `N² × N²` matrix form.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.levels * self.levels;
        let mut t = DMatrix::zeros(d, d);
        for &(r, c) in &self.pairs {
            t[(r, c)] = Complex64::new(1.0, 0.0);
        }
        t
    }

    pub fn apply(&self, psi: &StateVector) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.levels * self.levels);
        for &(r, c) in &self.pairs {
            y[r] = psi.entries()[c];
        }
        y
    }
}

/// Extent of the τ grid, in steps of the trajectory's own step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauGrid {
    /// `len` points `0, h, ..., (len - 1) h` for every t₂.
    Rectangular { len: usize },
    /// For each t₂ only the points with `t₂ + τ <= horizon`.
    Triangular { horizon: f64 },
}

/// Selected rows of `Y^{mn}(t₂, τ)` over a (t₂, τ) grid.
///
/// Values are stored per t₂, then per row, with τ contiguous.
#[derive(Debug, Clone)]
pub struct CorrelationSlice {
    seed: (usize, usize),
    rows: Vec<(usize, usize)>,
    t2_grid: Vec<f64>,
    step: f64,
    tau_len: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<Complex64>,
}

impl CorrelationSlice {
    pub fn seed(&self) -> (usize, usize) {
        self.seed
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    pub fn t2_grid(&self) -> &[f64] {
        &self.t2_grid
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of τ samples stored for t₂ index `k`.
    pub fn tau_len(&self, k: usize) -> usize {
        self.tau_len[k]
    }

    /// The τ series of one row at t₂ index `k`.
    pub fn series(&self, row: usize, k: usize) -> &[Complex64] {
        let len = self.tau_len[k];
        let start = self.offsets[k] + row * len;
        &self.values[start..start + len]
    }

    pub fn value(&self, row: usize, k: usize, tau_index: usize) -> Option<Complex64> {
        (row < self.rows.len() && tau_index < self.tau_len[k]).then(|| self.series(row, k)[tau_index])
    }

    /// Dump as CSV with columns `t2,tau,re,im,i,j`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t2,tau,re,im,i,j")?;
        for (k, &t2) in self.t2_grid.iter().enumerate() {
            for (r, &(i, j)) in self.rows.iter().enumerate() {
                for (q, z) in self.series(r, k).iter().enumerate() {
                    let tau = q as f64 * self.step;
                    writeln!(w, "{t2:.12e},{tau:.12e},{:.12e},{:.12e},{i},{j}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// General form: evolve `T^{mn} Ψ(t₂)` in τ for every t₂ of the
/// trajectory and keep the requested rows.
pub fn correlate(
    l: &Liouvillian,
    traj: &Trajectory,
    seed: &RegressionSeed,
    rows: &[(usize, usize)],
    tau: TauGrid,
) -> Result<CorrelationSlice> {
    let levels = l.levels();
    if traj.levels() != levels {
        return Err(Error::GridMismatch("trajectory and generator sizes differ".into()));
    }
    for &(i, j) in rows {
        for idx in [i, j] {
            if idx >= levels {
                return Err(Error::IndexOutOfRange { index: idx, levels });
            }
        }
    }
    let times = traj.times();
    let step = match traj.uniform_step() {
        Some(h) => h,
        None if times.len() == 1 => match tau {
            TauGrid::Rectangular { len } if len <= 1 => 1.0,
            _ => return Err(Error::GridMismatch("a single-point trajectory has no step".into())),
        },
        None => {
            return Err(Error::GridMismatch(
                "t₂ grid must be uniform so τ can share its step".into(),
            ))
        }
    };
    let tau_len: Vec<usize> = times
        .iter()
        .map(|&t2| match tau {
            TauGrid::Rectangular { len } => len,
            TauGrid::Triangular { horizon } => {
                let span = (horizon - t2) / step;
                if span < -1e-9 {
                    0
                } else {
                    (span + 1e-9).floor() as usize + 1
                }
            }
        })
        .collect();
    let prop = Propagator::new(l, step)?;
    let row_pos: Vec<usize> = rows.iter().map(|&(i, j)| basis_position(levels, i, j)).collect();

    let blocks: Vec<Vec<Complex64>> = traj
        .states()
        .par_iter()
        .zip(tau_len.par_iter())
        .map(|(psi, &len)| {
            let mut block = vec![Complex64::new(0.0, 0.0); rows.len() * len];
            if len == 0 {
                return block;
            }
            let mut y = seed.apply(psi);
            for q in 0..len {
                if q > 0 {
                    y = prop.matrix() * &y;
                }
                for (r, &p) in row_pos.iter().enumerate() {
                    block[r * len + q] = y[p];
                }
            }
            block
        })
        .collect();

    let mut offsets = Vec::with_capacity(blocks.len());
    let mut values = Vec::with_capacity(blocks.iter().map(Vec::len).sum());
    for b in blocks {
        offsets.push(values.len());
        values.extend(b);
    }
    Ok(CorrelationSlice {
        seed: seed.indices(),
        rows: rows.to_vec(),
        t2_grid: times.to_vec(),
        step,
        tau_len,
        offsets,
        values,
    })
}

/// `⟨A_i0(t₂+τ) A_0j(t₂)⟩` for every excited `i`, the correlators entering
/// the emission spectrum.
pub fn two_time_correlations(l: &Liouvillian, traj: &Trajectory, j: usize, tau: TauGrid) -> Result<CorrelationSlice> {
    let levels = l.levels();
    if j == 0 || j >= levels {
        return Err(Error::IndexOutOfRange { index: j, levels });
    }
    let seed = regression_seed(0, j, levels)?;
    let rows: Vec<_> = (1..levels).map(|i| (i, 0)).collect();
    correlate(l, traj, &seed, &rows, tau)
}
