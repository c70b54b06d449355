// SPDX-License-Identifier: Apache-2.0

mod common;

use clsim::correlations::TauGrid;
use clsim::model::ModelParams;
use clsim::*;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (
        prop::collection::vec(0.0f64..3.0, 3),
        prop::collection::vec(0.0f64..6.0, 3),
        prop::collection::vec(-60.0f64..60.0, 3),
        0.0f64..=1.0,
        0.0f64..4.0,
    )
        .prop_map(|(g, r, w, p, nr)| {
            let mut m = ModelParams::v_system(0.05, 0.05, 1.0, 1.0, p, nr);
            m.gamma_rad = g;
            m.excitation = r;
            m.omega = w;
            m
        })
}

fn initial() -> impl Strategy<Value = InitialState> {
    (
        prop::collection::vec(0.0f64..1.0, 4),
        prop::collection::vec(0.0f64..std::f64::consts::TAU, 4),
    )
        .prop_filter_map("zero amplitudes", |(a, d)| {
            let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| InitialState::Pure {
                amplitudes: a.iter().map(|x| x / norm).collect(),
                phases: d,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_stay_physical(p in params(), init in initial()) {
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let psi0 = initial_state(&init, 4).unwrap();
        let traj = propagate(&l, &psi0, &uniform_grid(0.0, 0.1, 51)).unwrap();
        for s in traj.states() {
            prop_assert!((s.trace().re - 1.0).abs() <= 1e-10);
            prop_assert!(s.trace().im.abs() <= 1e-10);
            prop_assert!(s.hermiticity_defect() <= 1e-10);
            prop_assert!(s.min_eigenvalue() >= -1e-8);
        }
    }

    #[test]
    fn no_interference_keeps_excited_coherences_zero(mut p in params()) {
        p.p_interf = 0.0;
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let psi0 = initial_state(&InitialState::ground(), 4).unwrap();
        let traj = propagate(&l, &psi0, &uniform_grid(0.0, 0.1, 51)).unwrap();
        for s in traj.states() {
            for i in 1..4 {
                for j in 1..4 {
                    if i != j {
                        prop_assert!(s.rho(i, j).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn propagation_composes(p in params(), init in initial(), t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let psi0 = initial_state(&init, 4).unwrap();
        let direct = propagate(&l, &psi0, &[t1 + t2]).unwrap();
        let mid = propagate(&l, &psi0, &[t1]).unwrap();
        let chained = propagate(&l, &mid.states()[0], &[t2]).unwrap();
        let d = (direct.states()[0].entries() - chained.states()[0].entries()).camax();
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn regression_is_a_semigroup_in_tau(p in params(), j in 1usize..4) {
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let psi0 = initial_state(&InitialState::ground(), 4).unwrap();
        let h = 0.02;
        let traj = propagate(&l, &psi0, &uniform_grid(0.0, h, 6)).unwrap();
        let slice = two_time_correlations(&l, &traj, j, TauGrid::Rectangular { len: 40 }).unwrap();
        // Y(t₂, τ₁ + τ₂) from a τ₁ restart
        let seed = clsim::regression_seed(0, j, 4).unwrap();
        let y0 = seed.apply(&traj.states()[3]);
        let p1 = Propagator::new(&l, 15.0 * h).unwrap();
        let p2 = Propagator::new(&l, 24.0 * h).unwrap();
        let y = p2.matrix() * (p1.matrix() * y0);
        for i in 1..4 {
            let z = slice.value(i - 1, 3, 39).unwrap();
            prop_assert!((z - y[clsim::model::basis_position(4, i, 0)]).norm() <= 1e-10);
        }
    }

    #[test]
    fn kernel_is_real_at_zero_delay(p in params(), init in initial()) {
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let psi0 = initial_state(&init, 4).unwrap();
        let traj = propagate(&l, &psi0, &uniform_grid(0.0, 0.05, 21)).unwrap();
        let k = clsim::spectrum::EmissionKernel::compute(&l, &traj, &m).unwrap();
        for t2 in 0..k.len() {
            prop_assert!(k.row(t2)[0].im.abs() <= 1e-10);
        }
    }
}

#[test]
fn long_time_limit_is_the_steady_state() {
    for (name, p) in common::preset_params() {
        let m = build_model(&p).unwrap();
        let l = build_liouvillian(&m);
        let ss = steady_state(&l).unwrap();
        let residual = l.apply(&ss).entries().camax();
        assert!(residual <= 1e-10, "{name}: residual {residual:e}");
        for init in [InitialState::ground(), InitialState::excited(1)] {
            let psi0 = initial_state(&init, 4).unwrap();
            let late = propagate(&l, &psi0, &[100.0]).unwrap();
            let d = (late.states()[0].entries() - ss.entries()).camax();
            assert!(d <= 1e-6, "{name}: |Ψ(100) - Ψ_ss| = {d:e}");
        }
    }
}

#[test]
fn steady_coherences_survive_interference() {
    let m = build_model(&ModelParams::v_system(0.05, 0.05, 1.0, 5.0, 1.0, 3.0)).unwrap();
    let ss = steady_state(&build_liouvillian(&m)).unwrap();
    assert!(ss.rho(1, 2).norm() > 1e-3);
    assert!(ss.rho(2, 3).norm() > 1e-3);
}

#[test]
fn coherences_rise_then_settle() {
    let m = build_model(&ModelParams::v_system(0.05, 0.05, 1.0, 5.0, 1.0, 3.0)).unwrap();
    let l = build_liouvillian(&m);
    let psi0 = initial_state(&InitialState::ground(), 4).unwrap();
    let traj = propagate(&l, &psi0, &uniform_grid(0.0, 0.01, 1001)).unwrap();
    let c = traj.coherence(1, 2);
    let (peak_at, &peak) = c.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert_eq!(c[0], 0.0);
    assert!(peak_at > 0 && peak_at < 1000);
    assert!(c[1000] < peak && c[1000] > 1e-3);
}

#[test]
fn two_level_reduction() {
    for r in [0.5, 1.0, 5.0] {
        let l = build_liouvillian(&build_model(&ModelParams::two_level(0.0, 1.0, r)).unwrap());
        let ss = steady_state(&l).unwrap();
        assert!((ss.rho(1, 1).re - r / (1.0 + 2.0 * r)).abs() <= 1e-8);
    }
    let l = build_liouvillian(&build_model(&ModelParams::two_level(0.7, 1.0, 0.0)).unwrap());
    let psi0 = initial_state(&InitialState::excited(1), 2).unwrap();
    let times = uniform_grid(0.0, 0.05, 201);
    let traj = propagate(&l, &psi0, &times).unwrap();
    for (t, p) in times.iter().zip(traj.population(1)) {
        assert!((p - (-t).exp()).abs() <= 1e-9);
    }
}
