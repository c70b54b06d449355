// SPDX-License-Identifier: Apache-2.0

//! Time-dependent filtered emission spectrum
//!
//! ```text
//! S(ω, t) = Re ∫₀ᵗ dt₂ ∫₀^{t-t₂} dτ e^{-Γ(t-t₂)} e^{(Γ/2 - iω)τ}
//!           Σᵢⱼ γᵢⱼ ⟨A_i0(t₂+τ) A_0j(t₂)⟩
//! ```
//!
//! with `γᵢᵢ = 2γᵢ` and `γᵢⱼ = -√(γᵢγⱼ)`. Two independent evaluations are
//! provided: a trapezoidal double quadrature over sampled correlators, and
//! a semi-analytic route that diagonalizes the generator and integrates
//! every eigenmode over τ in closed form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::correlations::{regression_seed, CorrelationSlice, TauGrid};
use crate::dynamics::{propagate, uniform_grid, Propagator, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::eigendecompose;
use crate::model::{basis_position, EmitterModel, Liouvillian, StateVector};

/// Eigenbases with a larger condition number are rejected by the
/// eigenmode route.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

/// Denominator floor for [`relative_intensity`], relative to the global
/// maximum of the reference spectrum.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    /// Filter bandwidth Γ.
    pub filter_bandwidth: f64,
    /// Detunings from the level-2 transition.
    pub omega: Vec<f64>,
    /// Observation times; multiples of `step` for the quadrature route.
    pub times: Vec<f64>,
    /// Quadrature step h shared by t₂ and τ.
    pub step: f64,
    /// Accept steps coarser than the resolution rule.
    pub allow_coarse: bool,
}

impl SpectrumConfig {
    /// Largest step that resolves the fastest phase on the ω grid.
    pub fn step_limit(&self) -> f64 {
        let wmax = self.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        1.0 / (10.0 * wmax.max(self.filter_bandwidth).max(1.0))
    }

    fn validate_grids(&self) -> Result<()> {
        if self.filter_bandwidth <= 0.0 || !self.filter_bandwidth.is_finite() {
            return Err(Error::GridMismatch("filter bandwidth must be positive".into()));
        }
        if self.omega.is_empty() || self.times.is_empty() {
            return Err(Error::GridMismatch("empty ω or t grid".into()));
        }
        if self.omega.iter().chain(&self.times).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("spectrum grid".into()));
        }
        if self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridMismatch("ω grid must be increasing".into()));
        }
        if self.times[0] < 0.0 || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridMismatch("t grid must be nonnegative and increasing".into()));
        }
        Ok(())
    }

    fn validate_step(&self) -> Result<()> {
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(Error::GridMismatch("quadrature step must be positive".into()));
        }
        let limit = self.step_limit();
        if !self.allow_coarse && self.step > limit * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse { step: self.step, limit });
        }
        Ok(())
    }

    /// Grid index of each observation time.
    fn time_indices(&self) -> Result<Vec<usize>> {
        self.times
            .iter()
            .map(|&t| {
                let k = (t / self.step).round();
                if (t - k * self.step).abs() > 1e-6 * self.step {
                    Err(Error::GridMismatch(format!(
                        "t = {t} is not a multiple of the step {}",
                        self.step
                    )))
                } else {
                    Ok(k as usize)
                }
            })
            .collect()
    }
}

/// `S(ω, t)` samples, stored t-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub omega: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl SpectrumGrid {
    pub fn new(omega: Vec<f64>, times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Self {
        assert_eq!(values.len(), omega.len() * times.len());
        SpectrumGrid {
            omega,
            times,
            values,
            label: label.into(),
        }
    }

    pub fn get(&self, t_index: usize, w_index: usize) -> f64 {
        self.values[t_index * self.omega.len() + w_index]
    }

    /// Spectrum at one observation time.
    pub fn at_time(&self, t_index: usize) -> &[f64] {
        let n = self.omega.len();
        &self.values[t_index * n..(t_index + 1) * n]
    }

    /// Maximum over all finite samples.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    fn same_axes(&self, other: &SpectrumGrid) -> Result<()> {
        if self.omega != other.omega || self.times != other.times {
            return Err(Error::GridMismatch(format!(
                "`{}` and `{}` are sampled on different grids",
                self.label, other.label
            )));
        }
        Ok(())
    }
}

/// Coefficients `γᵢⱼ` of the emitted field correlators.
pub fn gamma_matrix(model: &EmitterModel) -> DMatrix<f64> {
    let g = model.gamma_rad();
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 * g[i] } else { -(g[i] * g[j]).sqrt() })
}

/// `K(t₂, τ) = Σᵢⱼ γᵢⱼ ⟨A_i0(t₂+τ) A_0j(t₂)⟩` on the triangle
/// `t₂ + τ <= t_max` of a uniform grid.
#[derive(Debug, Clone)]
pub struct EmissionKernel {
    step: f64,
    len: usize,
    offsets: Vec<usize>,
    values: Vec<Complex64>,
}

impl EmissionKernel {
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of t₂ grid points (t₂ = 0 included).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// τ series at t₂ index `k`; its length is `len - k`.
    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.values[self.offsets[k]..self.offsets[k] + self.len - k]
    }

    fn from_rows(step: f64, rows: Vec<Vec<Complex64>>) -> Self {
        let len = rows.len();
        let mut offsets = Vec::with_capacity(len);
        let mut values = Vec::with_capacity(len * (len + 1) / 2);
        for r in rows {
            offsets.push(values.len());
            values.extend(r);
        }
        EmissionKernel {
            step,
            len,
            offsets,
            values,
        }
    }

    /// Contract stored correlators, one slice per seed `(0, j)`.
    pub fn from_slices(slices: &[CorrelationSlice], model: &EmitterModel) -> Result<Self> {
        let n = model.n_excited();
        let gamma = gamma_matrix(model);
        let first = slices
            .first()
            .ok_or_else(|| Error::GridMismatch("no correlation slices".into()))?;
        let step = first.step();
        let len = first.t2_grid().len();
        let mut by_seed = vec![None; n];
        for s in slices {
            let (m, j) = s.seed();
            if m != 0 || j == 0 || j > n {
                return Err(Error::GridMismatch(format!("unexpected seed ({m}, {j})")));
            }
            if s.t2_grid() != first.t2_grid() || (s.step() - step).abs() > 1e-12 * step {
                return Err(Error::GridMismatch("slices use different grids".into()));
            }
            by_seed[j - 1] = Some(s);
        }
        let by_seed: Vec<&CorrelationSlice> = by_seed
            .into_iter()
            .enumerate()
            .map(|(k, s)| s.ok_or_else(|| Error::GridMismatch(format!("missing seed (0, {})", k + 1))))
            .collect::<Result<_>>()?;
        // row index of (i, 0) inside each slice
        let row_of: Vec<Vec<usize>> = by_seed
            .iter()
            .map(|s| {
                (1..=n)
                    .map(|i| {
                        s.rows()
                            .iter()
                            .position(|&r| r == (i, 0))
                            .ok_or_else(|| Error::GridMismatch(format!("slice lacks row ({i}, 0)")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        let rows: Vec<Vec<Complex64>> = (0..len)
            .map(|k| {
                let need = len - k;
                let mut out = vec![Complex64::new(0.0, 0.0); need];
                for (jj, s) in by_seed.iter().enumerate() {
                    if s.tau_len(k) < need {
                        return Err(Error::GridMismatch(format!(
                            "correlations at t₂ index {k} stop before the triangle edge"
                        )));
                    }
                    for ii in 0..n {
                        let g = gamma[(ii, jj)];
                        if g == 0.0 {
                            continue;
                        }
                        let series = s.series(row_of[jj][ii], k);
                        for (o, z) in out.iter_mut().zip(series) {
                            *o += z * g;
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_rows(step, rows))
    }

    /// Build the kernel without storing correlators: the τ propagation is
    /// applied to the left, `cⱼᵀ exp(Mτ)`, once for all t₂.
    pub fn compute(l: &Liouvillian, traj: &Trajectory, model: &EmitterModel) -> Result<Self> {
        let levels = l.levels();
        let n = model.n_excited();
        if traj.levels() != levels {
            return Err(Error::GridMismatch("trajectory and generator sizes differ".into()));
        }
        let step = traj
            .uniform_step()
            .ok_or_else(|| Error::GridMismatch("kernel needs a uniform t₂ grid".into()))?;
        if traj.times()[0].abs() > 1e-12 {
            return Err(Error::GridMismatch("t₂ grid must start at 0".into()));
        }
        let len = traj.times().len();
        let gamma = gamma_matrix(model);
        let prop = Propagator::new(l, step)?;
        let pt = prop.matrix().transpose();

        // Only entries (i', 0) of T^{0j} Ψ are nonzero, equal to ⟨A_i'j⟩.
        let pos_i0: Vec<usize> = (0..levels).map(|i| basis_position(levels, i, 0)).collect();
        // left[j][m][i'] = (cⱼᵀ exp(M m h))_(i',0)
        let left: Vec<Vec<Vec<Complex64>>> = (1..=n)
            .into_par_iter()
            .map(|j| {
                let mut c = DVector::zeros(levels * levels);
                for i in 1..=n {
                    c[basis_position(levels, i, 0)] = Complex64::from(gamma[(i - 1, j - 1)]);
                }
                let mut rows = Vec::with_capacity(len);
                for m in 0..len {
                    if m > 0 {
                        c = &pt * &c;
                    }
                    rows.push(pos_i0.iter().map(|&p| c[p]).collect());
                }
                rows
            })
            .collect();

        let rows: Vec<Vec<Complex64>> = traj
            .states()
            .par_iter()
            .enumerate()
            .map(|(k, psi)| {
                let seeds: Vec<Vec<Complex64>> = (1..=n)
                    .map(|j| (0..levels).map(|i| psi.average(i, j)).collect())
                    .collect();
                (0..len - k)
                    .map(|m| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (lj, sj) in left.iter().zip(&seeds) {
                            for (a, b) in lj[m].iter().zip(sj) {
                                acc += a * b;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(step, rows))
    }
}

/// Trapezoidal double quadrature of the spectrum over a kernel.
pub fn spectrum_from_kernel(kernel: &EmissionKernel, cfg: &SpectrumConfig) -> Result<SpectrumGrid> {
    cfg.validate_grids()?;
    cfg.validate_step()?;
    if (kernel.step() - cfg.step).abs() > 1e-12 * cfg.step {
        return Err(Error::GridMismatch(format!(
            "kernel step {} differs from configured step {}",
            kernel.step(),
            cfg.step
        )));
    }
    let idx = cfg.time_indices()?;
    let top = *idx.last().unwrap();
    if top >= kernel.len() {
        return Err(Error::GridMismatch(format!(
            "kernel covers t <= {}, spectrum needs t = {}",
            (kernel.len() - 1) as f64 * kernel.step(),
            cfg.times.last().unwrap()
        )));
    }
    let h = cfg.step;
    let gam = cfg.filter_bandwidth;
    // e^{-Γ h d} for every distance d
    let decay: Vec<f64> = (0..=top).map(|d| (-gam * h * d as f64).exp()).collect();

    // Swapping the two trapezoid sums leaves an ω-independent weight per
    // delay for each observation time T:
    //   S(ω, T) = Re Σ_m e^{(Γ/2 - iω) m h} H_T[m],
    //   H_T[m]  = Σ_k a_k b_m e^{-Γ h (T-k)} K[k][m],
    // with a, b the trapezoid weights over t₂ ∈ [0, T] and τ ∈ [0, T-k].
    let weights: Vec<Vec<Complex64>> = idx
        .par_iter()
        .map(|&t| {
            let mut hm = vec![Complex64::new(0.0, 0.0); t + 1];
            for k in 0..t {
                let a = if k == 0 { 0.5 * h } else { h };
                let span = t - k;
                let c = a * h * decay[span];
                let row = &kernel.row(k)[..=span];
                hm[0] += row[0] * (0.5 * c);
                for m in 1..span {
                    hm[m] += row[m] * c;
                }
                hm[span] += row[span] * (0.5 * c);
            }
            hm
        })
        .collect();

    let columns: Vec<Vec<f64>> = cfg
        .omega
        .par_iter()
        .map(|&w| {
            let z = Complex64::new(0.5 * gam, -w) * h;
            let phase: Vec<Complex64> = (0..=top).map(|m| (z * m as f64).exp()).collect();
            weights
                .iter()
                .map(|hm| hm.iter().zip(&phase).map(|(a, b)| a * b).sum::<Complex64>().re)
                .collect()
        })
        .collect();

    let nw = cfg.omega.len();
    let mut values = vec![0.0; idx.len() * nw];
    for (wi, col) in columns.iter().enumerate() {
        for (q, v) in col.iter().enumerate() {
            values[q * nw + wi] = *v;
        }
    }
    Ok(SpectrumGrid::new(
        cfg.omega.clone(),
        cfg.times.clone(),
        values,
        "quadrature",
    ))
}

/// Quadrature route over stored correlation slices, one per seed `(0, j)`.
pub fn spectrum_quadrature(
    slices: &[CorrelationSlice],
    cfg: &SpectrumConfig,
    model: &EmitterModel,
) -> Result<SpectrumGrid> {
    cfg.validate_step()?;
    let kernel = EmissionKernel::from_slices(slices, model)?;
    spectrum_from_kernel(&kernel, cfg)
}

/// Quadrature route end to end: trajectory on the step grid, kernel,
/// double trapezoid.
pub fn quadrature_spectrum(
    l: &Liouvillian,
    psi0: &StateVector,
    model: &EmitterModel,
    cfg: &SpectrumConfig,
) -> Result<SpectrumGrid> {
    cfg.validate_grids()?;
    cfg.validate_step()?;
    let idx = cfg.time_indices()?;
    let top = *idx.last().unwrap();
    let traj = propagate(l, psi0, &uniform_grid(0.0, cfg.step, top + 1))?;
    let kernel = EmissionKernel::compute(l, &traj, model)?;
    spectrum_from_kernel(&kernel, cfg)
}

/// Correlation slices for every seed `(0, j)` on the triangle up to the
/// last observation time.
pub fn spectrum_slices(l: &Liouvillian, psi0: &StateVector, cfg: &SpectrumConfig) -> Result<Vec<CorrelationSlice>> {
    cfg.validate_grids()?;
    let idx = cfg.time_indices()?;
    let top = *idx.last().unwrap();
    let horizon = top as f64 * cfg.step;
    let traj = propagate(l, psi0, &uniform_grid(0.0, cfg.step, top + 1))?;
    (1..l.levels())
        .map(|j| crate::correlations::two_time_correlations(l, &traj, j, TauGrid::Triangular { horizon }))
        .collect()
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GL_ORDER: usize = 8;
const GL_PANEL: f64 = 0.05;

/// `(e^{zT} - 1) / z`, given `e^{zT}`, `1/z` and `|z|`.
fn mode_integral(z: Complex64, zinv: Complex64, znorm: f64, ezt: Complex64, t: f64) -> Complex64 {
    if znorm * t < 1e-4 {
        let x = z * t;
        t * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)))
    } else {
        (ezt - 1.0) * zinv
    }
}

/// Eigenmode route: `M = V Λ V⁻¹`, the τ integral of every mode in closed
/// form, composite Gauss–Legendre over t₂.
pub fn spectrum_eigen(
    l: &Liouvillian,
    psi0: &StateVector,
    cfg: &SpectrumConfig,
    model: &EmitterModel,
) -> Result<SpectrumGrid> {
    cfg.validate_grids()?;
    let levels = l.levels();
    let n = model.n_excited();
    let dim = levels * levels;
    let eig = eigendecompose(l.matrix())?;
    if eig.condition > EIGEN_CONDITION_LIMIT {
        return Err(Error::IllConditionedEigenbasis(eig.condition));
    }
    let gamma = gamma_matrix(model);
    let v = &eig.vectors;
    let vinv = &eig.inverse;
    let lambda = &eig.values;

    // r_j = c_jᵀ V, W_j = V⁻¹ T^{0j} V
    let mut r = Vec::with_capacity(n);
    let mut wmat = Vec::with_capacity(n);
    for j in 1..=n {
        let mut c = DVector::<Complex64>::zeros(dim);
        for i in 1..=n {
            c[basis_position(levels, i, 0)] = Complex64::from(gamma[(i - 1, j - 1)]);
        }
        r.push(v.transpose() * c);
        let t = regression_seed(0, j, levels)?.matrix();
        wmat.push(vinv * t * v);
    }
    let b = vinv * psi0.entries();
    let gam = cfg.filter_bandwidth;
    let (gx, gw) = gauss_legendre(GL_ORDER);

    // z_k, 1/z_k and |z_k| for every (ω, k)
    let zs: Vec<Vec<(Complex64, Complex64, f64)>> = cfg
        .omega
        .iter()
        .map(|&w| {
            lambda
                .iter()
                .map(|&lk| {
                    let z = Complex64::new(0.5 * gam, -w) + lk;
                    (z, z.inv(), z.norm())
                })
                .collect()
        })
        .collect();

    let rows: Vec<Vec<f64>> = cfg
        .times
        .par_iter()
        .map(|&t| {
            let mut acc = vec![Complex64::new(0.0, 0.0); cfg.omega.len()];
            if t == 0.0 {
                return vec![0.0; cfg.omega.len()];
            }
            let panels = (t / GL_PANEL).ceil().max(1.0) as usize;
            let width = t / panels as f64;
            for p in 0..panels {
                let a = p as f64 * width;
                for (x, wq) in gx.iter().zip(&gw) {
                    let t2 = a + 0.5 * width * (x + 1.0);
                    let weight = 0.5 * width * wq;
                    let span = t - t2;
                    let evolved = DVector::from_fn(dim, |k, _| b[k] * (lambda[k] * t2).exp());
                    let mut amp = DVector::<Complex64>::zeros(dim);
                    for (rj, wj) in r.iter().zip(&wmat) {
                        let y = wj * &evolved;
                        amp += rj.component_mul(&y);
                    }
                    let outer = weight * (-gam * span).exp();
                    let grow: Vec<Complex64> = lambda.iter().map(|&lk| ((lk + 0.5 * gam) * span).exp()).collect();
                    for (wi, &w) in cfg.omega.iter().enumerate() {
                        let rot = Complex64::new(0.0, -w * span).exp();
                        let mut s = Complex64::new(0.0, 0.0);
                        for (k, &(z, zinv, znorm)) in zs[wi].iter().enumerate() {
                            s += amp[k] * mode_integral(z, zinv, znorm, grow[k] * rot, span);
                        }
                        acc[wi] += s * outer;
                    }
                }
            }
            acc.into_iter().map(|z| z.re).collect()
        })
        .collect();
    let values = rows.into_iter().flatten().collect();
    Ok(SpectrumGrid::new(cfg.omega.clone(), cfg.times.clone(), values, "eigen"))
}

/// Which evaluation produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Quadrature,
    Eigen,
}

/// Eigenmode route, falling back to quadrature when the eigenbasis is
/// ill-conditioned.
pub fn spectrum_auto(
    l: &Liouvillian,
    psi0: &StateVector,
    model: &EmitterModel,
    cfg: &SpectrumConfig,
) -> Result<(SpectrumGrid, Route)> {
    match spectrum_eigen(l, psi0, cfg, model) {
        Ok(s) => Ok((s, Route::Eigen)),
        Err(Error::IllConditionedEigenbasis(_)) => Ok((quadrature_spectrum(l, psi0, model, cfg)?, Route::Quadrature)),
        Err(e) => Err(e),
    }
}

/// `|S_p - S_0|` pointwise.
pub fn interference_contribution(s_p: &SpectrumGrid, s_0: &SpectrumGrid) -> Result<SpectrumGrid> {
    s_p.same_axes(s_0)?;
    let values = s_p.values.iter().zip(&s_0.values).map(|(a, b)| (a - b).abs()).collect();
    Ok(SpectrumGrid::new(
        s_p.omega.clone(),
        s_p.times.clone(),
        values,
        "interference_contribution",
    ))
}

/// `S_II / S_I` pointwise; NaN where `S_I < floor`. The default floor is
/// `1e-6` of the global maximum of `S_I`.
pub fn relative_intensity(s_ii: &SpectrumGrid, s_i: &SpectrumGrid, floor: Option<f64>) -> Result<SpectrumGrid> {
    s_ii.same_axes(s_i)?;
    let floor = floor.unwrap_or_else(|| DEFAULT_FLOOR_FRACTION * s_i.max());
    if floor.is_nan() || floor <= 0.0 {
        return Err(Error::GridMismatch("relative intensity floor must be positive".into()));
    }
    let values = s_ii
        .values
        .iter()
        .zip(&s_i.values)
        .map(|(&a, &b)| if b < floor { f64::NAN } else { a / b })
        .collect();
    Ok(SpectrumGrid::new(
        s_ii.omega.clone(),
        s_ii.times.clone(),
        values,
        "relative_intensity",
    ))
}

/// `C(t) = |ρᵢⱼ| / (ρᵢᵢ + ρⱼⱼ)`, zero where the populations vanish.
pub fn coherence_ratio(traj: &Trajectory, i: usize, j: usize) -> Result<Vec<f64>> {
    let levels = traj.levels();
    for idx in [i, j] {
        if idx == 0 || idx >= levels {
            return Err(Error::IndexOutOfRange { index: idx, levels });
        }
    }
    if i == j {
        return Err(Error::IndexOutOfRange { index: j, levels });
    }
    Ok(traj
        .states()
        .iter()
        .map(|s| {
            let pop = s.rho(i, i).re + s.rho(j, j).re;
            if pop < 1e-14 {
                0.0
            } else {
                s.rho(i, j).norm() / pop
            }
        })
        .collect())
}

/// Indices of strict local maxima (plateaus count once, at their left edge).
pub fn peak_indices(row: &[f64]) -> Vec<usize> {
    let n = row.len();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k;
        while end + 1 < n && row[end + 1] == row[k] {
            end += 1;
        }
        let left_ok = k == 0 || row[k - 1] < row[k];
        let right_ok = end + 1 == n || row[end + 1] < row[k];
        let flat = k == 0 && end + 1 == n;
        if left_ok && right_ok && !flat && row[k].is_finite() {
            out.push(k);
        }
        k = end + 1;
    }
    out
}

/// Relative intensity read off at a spectral peak of the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRatio {
    pub t: f64,
    pub omega: f64,
    pub reference: f64,
    pub value: f64,
    pub ratio: f64,
}

/// Locate the peaks of `s_i` (no interference) at each time and report
/// `s_ii / s_i` there.
pub fn peak_ratios(s_ii: &SpectrumGrid, s_i: &SpectrumGrid) -> Result<Vec<PeakRatio>> {
    s_ii.same_axes(s_i)?;
    let mut out = Vec::new();
    for (q, &t) in s_i.times.iter().enumerate() {
        let reference = s_i.at_time(q);
        let value = s_ii.at_time(q);
        for k in peak_indices(reference) {
            out.push(PeakRatio {
                t,
                omega: s_i.omega[k],
                reference: reference[k],
                value: value[k],
                ratio: if reference[k] > 0.0 {
                    value[k] / reference[k]
                } else {
                    f64::NAN
                },
            });
        }
    }
    Ok(out)
}
