// SPDX-License-Identifier: Apache-2.0

//! Experiment documents. Every default is written back out in resolved
//! form, so a sidecar alone reproduces a run.

use std::path::PathBuf;

use clsim::model::ModelParams;
use clsim::{build_model, InitialState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dynamics,
    Spectrum,
    /// Spectra plus interference contribution, relative intensity and
    /// peak ratios against the p = 0 run.
    Derived,
    #[default]
    All,
}

impl Mode {
    pub fn dynamics(self) -> bool {
        matches!(self, Mode::Dynamics | Mode::All)
    }

    pub fn spectra(self) -> bool {
        !matches!(self, Mode::Dynamics)
    }

    pub fn derived(self) -> bool {
        matches!(self, Mode::Derived | Mode::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    #[default]
    Quadrature,
    Eigen,
    /// Eigenmode route, quadrature if the eigenbasis is ill-conditioned.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Either `{start, stop, count}` (endpoints included) or explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range(Range),
    Points(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Points(p) => p.clone(),
            Grid::Range(r) if r.count == 1 => vec![r.start],
            Grid::Range(r) => (0..r.count)
                .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.count - 1) as f64)
                .collect(),
        }
    }
}

fn default_bandwidth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    #[serde(default = "default_bandwidth")]
    pub filter_bandwidth: f64,
    pub omega: Grid,
    pub times: Grid,
    pub step: f64,
    #[serde(default)]
    pub allow_coarse: bool,
    #[serde(default)]
    pub route: RouteChoice,
}

fn default_t_end() -> f64 {
    5.0
}

fn default_points() -> usize {
    501
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSettings {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        DynamicsSettings {
            t_end: default_t_end(),
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub label: String,
    pub model: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub phases: Vec<f64>,
}

/// `"ground"`, `"excited-k"`, or a labelled pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateEntry {
    Named(String),
    Pure(PureState),
}

impl StateEntry {
    pub fn label(&self) -> &str {
        match self {
            StateEntry::Named(s) => s,
            StateEntry::Pure(p) => p.label.as_deref().unwrap_or("pure"),
        }
    }

    pub fn state(&self) -> InitialState {
        match self {
            StateEntry::Named(s) => InitialState::Named(s.clone()),
            StateEntry::Pure(p) => InitialState::Pure {
                amplitudes: p.amplitudes.clone(),
                phases: p.phases.clone(),
            },
        }
    }
}

fn default_states() -> Vec<StateEntry> {
    vec![StateEntry::Named("ground".into())]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    pub cases: Vec<Case>,
    /// Each case runs once per entry, overriding its `p_interf`. Defaults
    /// to the case's own value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    #[serde(default = "default_states")]
    pub initial_states: Vec<StateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSettings>,
    #[serde(default)]
    pub dynamics: DynamicsSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Written into sidecars; ignored when read back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

/// Parse a JSON document, reporting the line and column of the failure.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| CliError::ConfigParse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn check_label(what: &str, s: &str) -> Result<()> {
    let ok = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(CliError::ValidationFailed(format!(
            "{what} `{s}` must be non-empty and use only [A-Za-z0-9._-]"
        )))
    }
}

impl ExperimentConfig {
    pub fn p_values(&self) -> Vec<f64> {
        self.p_values.clone().unwrap_or_else(|| {
            let mut ps: Vec<f64> = self.cases.iter().map(|c| c.model.p_interf).collect();
            ps.dedup();
            ps
        })
    }

    /// Canonical form: defaults filled in, channels explicit, pure states
    /// labelled, provenance and output directory dropped. Also validates
    /// every model at every p.
    pub fn resolved(&self) -> Result<ExperimentConfig> {
        check_label("name", &self.name)?;
        if self.cases.is_empty() {
            return Err(CliError::ValidationFailed("`cases` is empty".into()));
        }
        let p_values = self.p_values();
        if p_values.is_empty() {
            return Err(CliError::ValidationFailed("`p_values` is empty".into()));
        }
        let mut cases = Vec::with_capacity(self.cases.len());
        for (k, case) in self.cases.iter().enumerate() {
            check_label("case label", &case.label)?;
            if self.cases[..k].iter().any(|c| c.label == case.label) {
                return Err(CliError::ValidationFailed(format!(
                    "duplicate case label `{}`",
                    case.label
                )));
            }
            let ctx = format!("cases[{k}] (`{}`).model", case.label);
            let model = build_model(&case.model).map_err(|e| CliError::from_core(&ctx, e))?;
            for &p in &p_values {
                model
                    .with_p(p)
                    .map_err(|e| CliError::from_core(&format!("{ctx} at p = {p}"), e))?;
            }
            cases.push(Case {
                label: case.label.clone(),
                model: model.params(),
            });
        }

        if self.initial_states.is_empty() {
            return Err(CliError::ValidationFailed("`initial_states` is empty".into()));
        }
        let mut states = Vec::with_capacity(self.initial_states.len());
        for (k, s) in self.initial_states.iter().enumerate() {
            let mut s = s.clone();
            if let StateEntry::Pure(p) = &mut s {
                p.label.get_or_insert_with(|| format!("state{k}"));
            }
            check_label("initial state label", s.label())?;
            if states.iter().any(|o: &StateEntry| o.label() == s.label()) {
                return Err(CliError::ValidationFailed(format!(
                    "duplicate initial state label `{}`",
                    s.label()
                )));
            }
            for case in &cases {
                clsim::initial_state(&s.state(), case.model.n_excited + 1)
                    .map_err(|e| CliError::from_core(&format!("initial_states[{k}] for case `{}`", case.label), e))?;
            }
            states.push(s);
        }

        if self.dynamics.t_end <= 0.0 || !self.dynamics.t_end.is_finite() || self.dynamics.points < 2 {
            return Err(CliError::ValidationFailed(
                "`dynamics` needs t_end > 0 and at least 2 points".into(),
            ));
        }
        if self.mode.spectra() && self.spectrum.is_none() {
            return Err(CliError::ValidationFailed(format!(
                "mode `{:?}` needs a `spectrum` section",
                self.mode
            )));
        }
        if self.mode == Mode::Derived && !(p_values.contains(&0.0) && p_values.iter().any(|&p| p != 0.0)) {
            return Err(CliError::ValidationFailed(
                "derived observables need p = 0 and at least one other p in `p_values`".into(),
            ));
        }
        if let Some(s) = &self.spectrum {
            let cfg = spectrum_config(s);
            check_spectrum(&cfg, s.route)?;
        }

        Ok(ExperimentConfig {
            name: self.name.clone(),
            mode: self.mode,
            cases,
            p_values: Some(p_values),
            initial_states: states,
            spectrum: self.spectrum.clone(),
            dynamics: self.dynamics.clone(),
            output_dir: None,
            provenance: None,
        })
    }
}

pub fn spectrum_config(s: &SpectrumSettings) -> clsim::SpectrumConfig {
    clsim::SpectrumConfig {
        filter_bandwidth: s.filter_bandwidth,
        omega: s.omega.values(),
        times: s.times.values(),
        step: s.step,
        allow_coarse: s.allow_coarse,
    }
}

/// Grid checks that do not need a model: monotone axes, step resolution
/// and, for the quadrature route, times on the step grid.
fn check_spectrum(cfg: &clsim::SpectrumConfig, route: RouteChoice) -> Result<()> {
    let fail = |m: String| Err(CliError::ValidationFailed(format!("spectrum: {m}")));
    if cfg.filter_bandwidth <= 0.0 || !cfg.filter_bandwidth.is_finite() {
        return fail("filter_bandwidth must be positive".into());
    }
    if cfg.omega.is_empty() || cfg.times.is_empty() {
        return fail("empty omega or times grid".into());
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !increasing(&cfg.omega) || !increasing(&cfg.times) {
        return fail("grids must be strictly increasing".into());
    }
    if cfg.times[0] < 0.0 {
        return fail("times must be nonnegative".into());
    }
    if cfg.step <= 0.0 || !cfg.step.is_finite() {
        return fail("step must be positive".into());
    }
    if route != RouteChoice::Eigen {
        let limit = cfg.step_limit();
        if !cfg.allow_coarse && cfg.step > limit * (1.0 + 1e-12) {
            return fail(format!(
                "step h = {} too coarse for |omega| up to the grid edge; need h <= {limit:.6e} (or allow_coarse)",
                cfg.step
            ));
        }
        for &t in &cfg.times {
            let k = (t / cfg.step).round();
            if (t - k * cfg.step).abs() > 1e-6 * cfg.step {
                return fail(format!("time {t} is not a multiple of the step {}", cfg.step));
            }
        }
    }
    Ok(())
}

/// Parameters of one case at one p.
pub fn case_at(case: &Case, p: f64) -> ModelParams {
    let mut m = case.model.clone();
    m.p_interf = p;
    m
}
