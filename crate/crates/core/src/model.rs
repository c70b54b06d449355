// SPDX-License-Identifier: Apache-2.0

//! Emitter parameters, the one-time-average basis and the Liouvillian.
//!
//! The emitter has a ground level `0` and `n` excited levels `1..=n` in a
//! V configuration. Its density operator obeys
//!
//! ```text
//! dρ/dt = -i[H₀, ρ]
//!         - Σᵢ (γᵢ + rᵢ) (½{S⁺ᵢS⁻ᵢ, ρ} - S⁻ᵢ ρ S⁺ᵢ)
//!         - Σᵢ rᵢ (½{S⁻ᵢS⁺ᵢ, ρ} - S⁺ᵢ ρ S⁻ᵢ)
//!         - Σᵢ≠ⱼ rᵢⱼ (½{S⁺ᵢS⁻ⱼ + S⁻ⱼS⁺ᵢ, ρ} - S⁻ⱼ ρ S⁺ᵢ - S⁺ᵢ ρ S⁻ⱼ)
//!         + Σ_(u→l) γ_nr (A_lu ρ A_ul - ½{A_uu, ρ})
//! ```
//!
//! with `S⁺ᵢ = |i⟩⟨0|`, `H₀ = Σ ωᵢ₀ |i⟩⟨i|` and `rᵢⱼ = p √(rᵢ rⱼ)`. All
//! rates and frequencies are in units of a reference radiative rate γ.
//!
//! The generator acts on the vector Ψ of averages `⟨A_ij⟩ = ρ_ji`, ordered
//! as populations, excited-excited coherence pairs, ground-excited
//! coherence pairs and finally `⟨A₀₀⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Lower bound accepted for eigenvalues of the pump rate matrix.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Raw, unvalidated emitter parameters as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n_excited: usize,
    /// Transition frequencies ωᵢ₀ in the rotating frame, one per excited level.
    pub omega: Vec<f64>,
    pub gamma_rad: Vec<f64>,
    pub excitation: Vec<f64>,
    pub p_interf: f64,
    pub gamma_nr: f64,
    /// `(upper, lower)` pairs. Defaults to every downward pair among the
    /// excited levels.
    #[serde(default)]
    pub nr_channels: Option<Vec<(usize, usize)>>,
}

impl ModelParams {
    /// Four-level V system with equal radiative and excitation rates.
    ///
    /// The frame puts level 2 at zero detuning, so `ω₁₀ = -ω₂₁` and
    /// `ω₃₀ = ω₃₂`.
    pub fn v_system(
        spacing_21: f64,
        spacing_32: f64,
        gamma: f64,
        excitation: f64,
        p_interf: f64,
        gamma_nr: f64,
    ) -> Self {
        ModelParams {
            n_excited: 3,
            omega: vec![-spacing_21, 0.0, spacing_32],
            gamma_rad: vec![gamma; 3],
            excitation: vec![excitation; 3],
            p_interf,
            gamma_nr,
            nr_channels: None,
        }
    }

    /// Single excited level: the two-level emitter.
    pub fn two_level(omega: f64, gamma: f64, excitation: f64) -> Self {
        ModelParams {
            n_excited: 1,
            omega: vec![omega],
            gamma_rad: vec![gamma],
            excitation: vec![excitation],
            p_interf: 0.0,
            gamma_nr: 0.0,
            nr_channels: None,
        }
    }
}

/// A nonradiative decay channel `upper → lower` between excited levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NrChannel {
    pub upper: usize,
    pub lower: usize,
    pub rate: f64,
}

/// Validated emitter model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterModel {
    n_excited: usize,
    omega: Vec<f64>,
    gamma_rad: Vec<f64>,
    excitation: Vec<f64>,
    p_interf: f64,
    channels: Vec<NrChannel>,
}

fn check_len(field: &str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            field: field.to_string(),
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

fn check_rates(field: &str, v: &[f64]) -> Result<()> {
    for (k, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("{field}[{k}]")));
        }
        if x < 0.0 {
            return Err(Error::NegativeRate {
                field: format!("{field}[{k}]"),
                value: x,
            });
        }
    }
    Ok(())
}

/// Validate raw parameters and produce an [`EmitterModel`].
pub fn build_model(params: &ModelParams) -> Result<EmitterModel> {
    let n = params.n_excited;
    if n == 0 {
        return Err(Error::NoExcitedLevels);
    }
    check_len("omega", &params.omega, n)?;
    check_len("gamma_rad", &params.gamma_rad, n)?;
    check_len("excitation", &params.excitation, n)?;
    for (k, w) in params.omega.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite(format!("omega[{k}]")));
        }
    }
    check_rates("gamma_rad", &params.gamma_rad)?;
    check_rates("excitation", &params.excitation)?;
    check_rates("gamma_nr", &[params.gamma_nr]).map_err(|e| match e {
        Error::NegativeRate { value, .. } => Error::NegativeRate {
            field: "gamma_nr".into(),
            value,
        },
        _ => Error::NonFinite("gamma_nr".into()),
    })?;
    let p = params.p_interf;
    if !p.is_finite() {
        return Err(Error::NonFinite("p_interf".into()));
    }
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::InterferenceOutOfRange(p));
    }

    let pairs = match &params.nr_channels {
        Some(c) => c.clone(),
        None => (1..=n).rev().flat_map(|u| (1..u).rev().map(move |l| (u, l))).collect(),
    };
    let mut channels = Vec::with_capacity(pairs.len());
    for (upper, lower) in pairs {
        if lower < 1 || lower >= upper || upper > n {
            return Err(Error::BadChannel {
                upper,
                lower,
                n_excited: n,
            });
        }
        channels.push(NrChannel {
            upper,
            lower,
            rate: params.gamma_nr,
        });
    }

    let model = EmitterModel {
        n_excited: n,
        omega: params.omega.clone(),
        gamma_rad: params.gamma_rad.clone(),
        excitation: params.excitation.clone(),
        p_interf: p,
        channels,
    };
    let min_eigenvalue = model.pump_min_eigenvalue();
    let scale = model.excitation.iter().cloned().fold(1.0, f64::max);
    if min_eigenvalue < -PSD_TOLERANCE * scale {
        return Err(Error::PumpMatrixNotPsd { min_eigenvalue });
    }
    Ok(model)
}

impl EmitterModel {
    pub fn n_excited(&self) -> usize {
        self.n_excited
    }

    /// Total number of levels, ground included.
    pub fn levels(&self) -> usize {
        self.n_excited + 1
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn gamma_rad(&self) -> &[f64] {
        &self.gamma_rad
    }

    pub fn excitation(&self) -> &[f64] {
        &self.excitation
    }

    pub fn p_interf(&self) -> f64 {
        self.p_interf
    }

    pub fn channels(&self) -> &[NrChannel] {
        &self.channels
    }

    /// Cross pump rate `rᵢⱼ = p √(rᵢ rⱼ)` for excited levels `i, j ≥ 1`.
    pub fn cross_rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.excitation[i - 1];
        }
        self.p_interf * (self.excitation[i - 1] * self.excitation[j - 1]).sqrt()
    }

    /// The pump rate matrix `R` with `Rᵢᵢ = rᵢ`, `Rᵢⱼ = rᵢⱼ`.
    pub fn pump_matrix(&self) -> DMatrix<f64> {
        let n = self.n_excited;
        DMatrix::from_fn(n, n, |a, b| self.cross_rate(a + 1, b + 1))
    }

    pub fn pump_min_eigenvalue(&self) -> f64 {
        self.pump_matrix()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy of this model with a different interference parameter.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        let mut params = self.params();
        params.p_interf = p;
        build_model(&params)
    }

    /// Parameters that rebuild this model.
    pub fn params(&self) -> ModelParams {
        ModelParams {
            n_excited: self.n_excited,
            omega: self.omega.clone(),
            gamma_rad: self.gamma_rad.clone(),
            excitation: self.excitation.clone(),
            p_interf: self.p_interf,
            gamma_nr: self.channels.first().map_or(0.0, |c| c.rate),
            nr_channels: Some(self.channels.iter().map(|c| (c.upper, c.lower)).collect()),
        }
    }
}

/// Position of `⟨A_ij⟩` inside Ψ for an emitter with `levels` levels.
pub fn basis_position(levels: usize, i: usize, j: usize) -> usize {
    let n = levels - 1;
    debug_assert!(i < levels && j < levels);
    match (i, j) {
        (0, 0) => levels * levels - 1,
        (i, 0) => n * n + 2 * (i - 1),
        (0, j) => n * n + 2 * (j - 1) + 1,
        (i, j) if i == j => i - 1,
        (i, j) => {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            // lexicographic index of the pair (a, b), a < b
            let k = (1..a).map(|x| n - x).sum::<usize>() + (b - a - 1);
            n + 2 * k + usize::from(i > j)
        }
    }
}

/// Ordered list of `(i, j)` labels of Ψ.
pub fn basis_labels(levels: usize) -> Vec<(usize, usize)> {
    let n = levels - 1;
    let mut out = Vec::with_capacity(levels * levels);
    out.extend((1..=n).map(|i| (i, i)));
    for a in 1..=n {
        for b in (a + 1)..=n {
            out.push((a, b));
            out.push((b, a));
        }
    }
    for i in 1..=n {
        out.push((i, 0));
        out.push((0, i));
    }
    out.push((0, 0));
    out
}

/// The vector Ψ of one-time averages `⟨A_ij⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    levels: usize,
    entries: DVector<Complex64>,
}

impl StateVector {
    pub fn from_entries(levels: usize, entries: DVector<Complex64>) -> Self {
        assert_eq!(entries.len(), levels * levels);
        StateVector { levels, entries }
    }

    /// Map a density matrix into Ψ through `⟨A_ij⟩ = ρ_ji`.
    pub fn from_density(rho: &DMatrix<Complex64>) -> Self {
        let levels = rho.nrows();
        let mut entries = DVector::zeros(levels * levels);
        for i in 0..levels {
            for j in 0..levels {
                entries[basis_position(levels, i, j)] = rho[(j, i)];
            }
        }
        StateVector { levels, entries }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DVector<Complex64> {
        self.entries
    }

    /// `⟨A_ij⟩`.
    pub fn average(&self, i: usize, j: usize) -> Complex64 {
        self.entries[basis_position(self.levels, i, j)]
    }

    /// Density matrix element `ρ_ij`.
    pub fn rho(&self, i: usize, j: usize) -> Complex64 {
        self.average(j, i)
    }

    pub fn density(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.levels, self.levels, |i, j| self.rho(i, j))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.levels).map(|i| self.average(i, i)).sum()
    }

    /// Largest `|⟨A_ij⟩ - conj⟨A_ji⟩|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.levels {
            for j in i..self.levels {
                let d = (self.average(i, j) - self.average(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let rho = self.density();
        let herm = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Initial state of the emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    /// Named preset: `"ground"` or `"excited-<k>"`.
    Named(String),
    /// Pure state `Σ cₖ e^{iδₖ} |k⟩`. Missing trailing entries are zero.
    Pure {
        amplitudes: Vec<f64>,
        #[serde(default)]
        phases: Vec<f64>,
    },
}

impl InitialState {
    pub fn ground() -> Self {
        InitialState::Named("ground".into())
    }

    pub fn excited(k: usize) -> Self {
        InitialState::Named(format!("excited-{k}"))
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Named(s) => s.clone(),
            InitialState::Pure { amplitudes, phases } => {
                let parts: Vec<String> = amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, c)| format!("{c}@{}", phases.get(k).copied().unwrap_or(0.0)))
                    .collect();
                format!("pure[{}]", parts.join(","))
            }
        }
    }
}

const NORM_TOLERANCE: f64 = 1e-9;

/// Build Ψ(0) for a pure initial state, `ρ = |ψ⟩⟨ψ|`.
pub fn initial_state(spec: &InitialState, levels: usize) -> Result<StateVector> {
    let psi: Vec<Complex64> = match spec {
        InitialState::Named(name) => {
            let k = match name.as_str() {
                "ground" => 0,
                other => other
                    .strip_prefix("excited-")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownInitialState(other.to_string()))?,
            };
            if k >= levels {
                return Err(Error::IndexOutOfRange { index: k, levels });
            }
            (0..levels).map(|i| if i == k { C1 } else { C0 }).collect()
        }
        InitialState::Pure { amplitudes, phases } => {
            if amplitudes.len() > levels {
                return Err(Error::IndexOutOfRange {
                    index: amplitudes.len() - 1,
                    levels,
                });
            }
            if phases.len() > levels {
                return Err(Error::IndexOutOfRange {
                    index: phases.len() - 1,
                    levels,
                });
            }
            if amplitudes.iter().chain(phases).any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("initial state".into()));
            }
            (0..levels)
                .map(|i| {
                    let c = amplitudes.get(i).copied().unwrap_or(0.0);
                    let d = phases.get(i).copied().unwrap_or(0.0);
                    Complex64::from_polar(c, d)
                })
                .collect()
        }
    };
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    let rho = DMatrix::from_fn(levels, levels, |i, j| psi[i] * psi[j].conj());
    Ok(StateVector::from_density(&rho))
}

/// The generator `M` of `dΨ/dt = MΨ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    levels: usize,
    matrix: DMatrix<Complex64>,
}

impl Liouvillian {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels * self.levels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn labels(&self) -> Vec<(usize, usize)> {
        basis_labels(self.levels)
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector::from_entries(self.levels, &self.matrix * psi.entries())
    }

    /// Row vector selecting `Σᵢ ⟨A_ii⟩`.
    pub fn trace_functional(&self) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim());
        for i in 0..self.levels {
            v[basis_position(self.levels, i, i)] = C1;
        }
        v
    }
}

/// Accumulates superoperator terms `ρ ↦ c·X ρ Y` directly in the Ψ basis.
struct SuperopBuilder {
    levels: usize,
    m: DMatrix<Complex64>,
    pos: Vec<usize>,
}

impl SuperopBuilder {
    fn new(levels: usize) -> Self {
        let mut pos = vec![0; levels * levels];
        for i in 0..levels {
            for j in 0..levels {
                pos[i * levels + j] = basis_position(levels, i, j);
            }
        }
        SuperopBuilder {
            levels,
            m: DMatrix::zeros(levels * levels, levels * levels),
            pos,
        }
    }

    // Ψ_(i,j) = ρ_ji, so d/dt Ψ_(i,j) += c Σ_{a,b} X_ja ρ_ab Y_bi
    //                                  = c Σ_{a,b} X_ja Y_bi Ψ_(b,a).
    fn sandwich(&mut self, c: Complex64, x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) {
        if c == C0 {
            return;
        }
        let l = self.levels;
        for i in 0..l {
            for j in 0..l {
                let row = self.pos[i * l + j];
                for a in 0..l {
                    let xja = x[(j, a)];
                    if xja == C0 {
                        continue;
                    }
                    for b in 0..l {
                        let ybi = y[(b, i)];
                        if ybi == C0 {
                            continue;
                        }
                        let col = self.pos[b * l + a];
                        self.m[(row, col)] += c * xja * ybi;
                    }
                }
            }
        }
    }

    /// `c (L ρ K† - ½{K†L, ρ})`.
    fn dissipator(&mut self, c: f64, l_op: &DMatrix<Complex64>, k_op: &DMatrix<Complex64>) {
        let id = DMatrix::identity(self.levels, self.levels);
        let kd = k_op.adjoint();
        let kl = &kd * l_op;
        self.sandwich(Complex64::from(c), l_op, &kd);
        self.sandwich(Complex64::from(-0.5 * c), &kl, &id);
        self.sandwich(Complex64::from(-0.5 * c), &id, &kl);
    }
}

/// Transition operator `A_ij = |i⟩⟨j|`.
pub fn transition(levels: usize, i: usize, j: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(levels, levels);
    m[(i, j)] = C1;
    m
}

/// Assemble `M` from every term of the master equation.
pub fn build_liouvillian(model: &EmitterModel) -> Liouvillian {
    let levels = model.levels();
    let n = model.n_excited;
    let id = DMatrix::<Complex64>::identity(levels, levels);
    let mut b = SuperopBuilder::new(levels);

    let h = DMatrix::from_fn(levels, levels, |i, j| {
        if i == j && i > 0 {
            Complex64::from(model.omega[i - 1])
        } else {
            C0
        }
    });
    b.sandwich(Complex64::new(0.0, -1.0), &h, &id);
    b.sandwich(Complex64::new(0.0, 1.0), &id, &h);

    let raise: Vec<_> = (1..=n).map(|i| transition(levels, i, 0)).collect();
    let lower: Vec<_> = (1..=n).map(|i| transition(levels, 0, i)).collect();

    for i in 0..n {
        // spontaneous emission broadened by the pump
        b.dissipator(model.gamma_rad[i] + model.excitation[i], &lower[i], &lower[i]);
        // incoherent excitation
        b.dissipator(model.excitation[i], &raise[i], &raise[i]);
    }

    for (i, up) in raise.iter().enumerate() {
        for (j, down) in lower.iter().enumerate() {
            if i == j {
                continue;
            }
            let rij = model.cross_rate(i + 1, j + 1);
            if rij == 0.0 {
                continue;
            }
            let x = up * down + down * up;
            let half = Complex64::from(-0.5 * rij);
            b.sandwich(half, &x, &id);
            b.sandwich(half, &id, &x);
            b.sandwich(Complex64::from(rij), down, up);
            b.sandwich(Complex64::from(rij), up, down);
        }
    }

    for ch in &model.channels {
        let l_op = transition(levels, ch.lower, ch.upper);
        b.dissipator(ch.rate, &l_op, &l_op);
    }

    Liouvillian { levels, matrix: b.m }
}
