// SPDX-License-Identifier: Apache-2.0

//! Plan, execute and write one experiment.

use std::fs;
use std::path::{Path, PathBuf};

use clsim::spectrum::{peak_ratios, Route};
use clsim::*;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{case_at, parse_config, spectrum_config, ExperimentConfig, RouteChoice};
use crate::error::{CliError, Result};
use crate::format::Csv;
use crate::presets;

pub const DEFAULT_OUT: &str = "clsim-out";

/// A finished file, held in memory until the whole run has succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub step: Option<f64>,
    pub quiet: bool,
}

/// Preset name or path to a JSON document.
pub fn load(source: &str) -> Result<ExperimentConfig> {
    if let Some(doc) = presets::preset(source) {
        return parse_config(doc, source);
    }
    let path = Path::new(source);
    if !path.exists() && !source.contains(['/', '.']) {
        return Err(CliError::UnknownPreset(source.into(), presets::names().join(", ")));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, source)
}

fn with_step(cfg: &ExperimentConfig, step: Option<f64>) -> Result<ExperimentConfig> {
    let mut cfg = cfg.clone();
    if let Some(h) = step {
        match cfg.spectrum.as_mut() {
            Some(s) => s.step = h,
            None => {
                return Err(CliError::ValidationFailed(
                    "--step given but the experiment has no spectrum section".into(),
                ))
            }
        }
    }
    cfg.resolved()
}

fn p_list(ps: &[f64]) -> String {
    ps.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(",")
}

/// One report line per case; fails exactly where `run` would before any
/// numerics.
pub fn validate(cfg: &ExperimentConfig, step: Option<f64>) -> Result<Vec<String>> {
    let cfg = with_step(cfg, step)?;
    let ps = cfg.p_values();
    Ok(cfg
        .cases
        .iter()
        .map(|c| {
            let levels = c.model.n_excited + 1;
            format!(
                "{} [{}]: valid; {}-dim Liouvillian; p ∈ {{{}}}",
                cfg.name,
                c.label,
                levels * levels,
                p_list(&ps)
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
struct Job {
    case: usize,
    state: usize,
    p: f64,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let ps = cfg.p_values();
    let mut out = Vec::new();
    for case in 0..cfg.cases.len() {
        for state in 0..cfg.initial_states.len() {
            for &p in &ps {
                out.push(Job { case, state, p });
            }
        }
    }
    out
}

fn stem(cfg: &ExperimentConfig, job: &Job) -> String {
    format!(
        "{}_{}_{}_p{}",
        cfg.name,
        cfg.cases[job.case].label,
        cfg.initial_states[job.state].label(),
        job.p
    )
}

struct Setup {
    model: EmitterModel,
    l: Liouvillian,
    psi0: StateVector,
}

fn setup(cfg: &ExperimentConfig, job: &Job) -> Result<Setup> {
    let case = &cfg.cases[job.case];
    let ctx = format!("case `{}` at p = {}", case.label, job.p);
    let model = build_model(&case_at(case, job.p)).map_err(|e| CliError::from_core(&ctx, e))?;
    let l = build_liouvillian(&model);
    let psi0 = initial_state(&cfg.initial_states[job.state].state(), model.levels())
        .map_err(|e| CliError::from_core(&ctx, e))?;
    Ok(Setup { model, l, psi0 })
}

fn excited_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

fn dynamics_artifacts(cfg: &ExperimentConfig, job: &Job) -> Result<Vec<Artifact>> {
    let s = setup(cfg, job)?;
    let n = s.model.n_excited();
    let d = &cfg.dynamics;
    let h = d.t_end / (d.points - 1) as f64;
    let times = uniform_grid(0.0, h, d.points);
    let traj = propagate(&s.l, &s.psi0, &times).map_err(|e| CliError::from_core("propagation", e))?;
    let pairs = excited_pairs(n);

    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|i| format!("rho_{i}{i}")));
    header.extend(pairs.iter().map(|(i, j)| format!("abs_rho_{i}{j}")));
    let mut csv = Csv::new(&header);
    for (t, st) in times.iter().zip(traj.states()) {
        let mut row = vec![*t];
        row.extend((0..=n).map(|i| st.rho(i, i).re));
        row.extend(pairs.iter().map(|&(i, j)| st.rho(i, j).norm()));
        csv.row(&row);
    }

    let ratios: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(i, j)| coherence_ratio(&traj, i, j))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::from_core("coherence ratio", e))?;
    let mut header = vec!["t".to_string()];
    header.extend(pairs.iter().map(|(i, j)| format!("C_{i}{j}")));
    let mut cr = Csv::new(&header);
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![*t];
        row.extend(ratios.iter().map(|r| r[k]));
        cr.row(&row);
    }
    let base = stem(cfg, job);
    Ok(vec![
        Artifact {
            name: format!("{base}_trajectory.csv"),
            contents: csv.finish(),
        },
        Artifact {
            name: format!("{base}_coherence_ratio.csv"),
            contents: cr.finish(),
        },
    ])
}

fn compute_spectrum(cfg: &ExperimentConfig, job: &Job) -> Result<(SpectrumGrid, Route)> {
    let settings = cfg.spectrum.as_ref().expect("validated");
    let sc = spectrum_config(settings);
    let s = setup(cfg, job)?;
    let ctx = format!("spectrum for {}", stem(cfg, job));
    let wrap = |e| CliError::from_core(&ctx, e);
    match settings.route {
        RouteChoice::Quadrature => Ok((
            quadrature_spectrum(&s.l, &s.psi0, &s.model, &sc).map_err(wrap)?,
            Route::Quadrature,
        )),
        RouteChoice::Eigen => Ok((
            spectrum_eigen(&s.l, &s.psi0, &sc, &s.model).map_err(wrap)?,
            Route::Eigen,
        )),
        RouteChoice::Auto => spectrum_auto(&s.l, &s.psi0, &s.model, &sc).map_err(wrap),
    }
}

fn grid_csv(g: &SpectrumGrid, column: &str) -> String {
    let mut csv = Csv::new(&["t", "omega_detuning", column]);
    for (q, &t) in g.times.iter().enumerate() {
        for (k, &w) in g.omega.iter().enumerate() {
            csv.row(&[t, w, g.get(q, k)]);
        }
    }
    csv.finish()
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Quadrature => "quadrature",
        Route::Eigen => "eigen",
    }
}

/// Run every job and render all artifacts, sidecar last.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<Artifact>> {
    let cfg = with_step(cfg, opts.step)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::ValidationFailed(format!("worker pool: {e}")))?;
    let jobs = jobs(&cfg);
    let quiet = opts.quiet;
    let note = |msg: String| {
        if !quiet {
            eprintln!("[{}] {msg}", cfg.name);
        }
    };

    let (dynamics, spectra) = pool.install(|| -> Result<_> {
        let dynamics: Vec<Vec<Artifact>> = if cfg.mode.dynamics() {
            jobs.par_iter()
                .map(|j| {
                    let a = dynamics_artifacts(&cfg, j);
                    note(format!("dynamics {} done", stem(&cfg, j)));
                    a
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let spectra: Vec<(SpectrumGrid, Route)> = if cfg.mode.spectra() {
            jobs.par_iter()
                .map(|j| {
                    let s = compute_spectrum(&cfg, j);
                    note(format!("spectrum {} done", stem(&cfg, j)));
                    s
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok((dynamics, spectra))
    })?;

    let mut artifacts: Vec<Artifact> = dynamics.into_iter().flatten().collect();
    let mut records = Vec::new();
    for (j, (grid, route)) in jobs.iter().zip(&spectra) {
        let name = format!("{}_spectrum.csv", stem(&cfg, j));
        records.push(json!({
            "file": name,
            "case": cfg.cases[j.case].label,
            "initial_state": cfg.initial_states[j.state].label(),
            "p": j.p,
            "route": route_name(*route),
            "min": grid.values.iter().cloned().fold(f64::INFINITY, f64::min),
            "max": grid.max(),
        }));
        artifacts.push(Artifact {
            name,
            contents: grid_csv(grid, "S"),
        });
    }

    if cfg.mode.derived() && !spectra.is_empty() {
        for (j, (grid, _)) in jobs.iter().zip(&spectra) {
            if j.p == 0.0 {
                continue;
            }
            let Some((_, (reference, _))) = jobs
                .iter()
                .zip(&spectra)
                .find(|(o, _)| o.case == j.case && o.state == j.state && o.p == 0.0)
            else {
                continue;
            };
            let wrap = |e| CliError::from_core("derived observables", e);
            let base = stem(&cfg, j);
            let ic = interference_contribution(grid, reference).map_err(wrap)?;
            let ri = relative_intensity(grid, reference, None).map_err(wrap)?;
            let peaks = peak_ratios(grid, reference).map_err(wrap)?;
            let mut pc = Csv::new(&["t", "omega_detuning", "S_reference", "S", "ratio"]);
            for pk in &peaks {
                pc.row(&[pk.t, pk.omega, pk.reference, pk.value, pk.ratio]);
            }
            artifacts.push(Artifact {
                name: format!("{base}_interference_contribution.csv"),
                contents: grid_csv(&ic, "interference_contribution"),
            });
            artifacts.push(Artifact {
                name: format!("{base}_relative_intensity.csv"),
                contents: grid_csv(&ri, "relative_intensity"),
            });
            artifacts.push(Artifact {
                name: format!("{base}_peaks.csv"),
                contents: pc.finish(),
            });
        }
    }

    let mut sidecar = cfg.clone();
    sidecar.provenance = Some(json!({
        "generator": format!("clsim {}", env!("CARGO_PKG_VERSION")),
        "liouvillian_dims": cfg.cases.iter().map(|c| json!({
            "case": c.label,
            "dim": (c.model.n_excited + 1) * (c.model.n_excited + 1),
        })).collect::<Vec<_>>(),
        "spectra": records,
        "files": artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
    }));
    let mut text = serde_json::to_string_pretty(&sidecar).expect("config serializes");
    text.push('\n');
    artifacts.push(Artifact {
        name: format!("{}.json", cfg.name),
        contents: text,
    });
    Ok(artifacts)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(|e| CliError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Output directory: flag or environment, then the config, then the default.
pub fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let dir = output_dir(cfg, opts);
    let artifacts = execute(cfg, opts)?;
    write_artifacts(&dir, &artifacts)
}
