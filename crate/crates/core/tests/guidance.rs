use num_complex::Complex64;
use pilotwave::guidance::{
    evolve_ensemble, integrate_trajectory, velocity_field, Ensemble, EnsembleOptions, FieldSource,
    IntegratorSettings, Provenance, SnapshotSource, StationarySource,
};
use pilotwave::numerics::{propagate_free, Grid, Initializer, WaveFunction};
use proptest::prelude::*;

fn prov(x0: f64) -> Provenance {
    Provenance {
        seed: 7,
        initial: [x0, 0.0],
        experiment: "test".into(),
    }
}

fn free_gaussian() -> WaveFunction {
    let g = Grid::new_1d(-20.0, 20.0, 512).unwrap();
    WaveFunction::new(g, &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap()
}

fn free_source(t_end: f64) -> SnapshotSource {
    let n = (t_end / 0.01).round() as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * 0.01).collect();
    SnapshotSource::free_flight(&free_gaussian(), &times).unwrap()
}

fn windowed_plane_wave(k: f64) -> WaveFunction {
    let g = Grid::new_1d(-20.0, 20.0, 512).unwrap();
    let amps = g
        .nodes()
        .map(|p| Complex64::from_polar((-(p[0] / 10.0).powi(12)).exp(), k * p[0]))
        .collect();
    let mut psi = WaveFunction::from_amplitudes(g, 1, amps, 0.0).unwrap();
    psi.normalize().unwrap();
    psi
}

fn box_ground() -> WaveFunction {
    let g = Grid::new_1d(-0.5, 1.5, 256).unwrap();
    WaveFunction::new(
        g,
        &Initializer::BoxEigenstate {
            n: 1,
            a: 0.0,
            b: 1.0,
        },
    )
    .unwrap()
}

#[test]
fn velocity_of_real_state_vanishes() {
    let v = velocity_field(&box_ground()).unwrap();
    assert!(v.max_unmasked_speed() < 1e-10);
}

#[test]
fn velocity_of_plane_wave_is_k() {
    let v = velocity_field(&windowed_plane_wave(2.0)).unwrap();
    for x in [-3.0, -0.7, 0.0, 2.2, 5.0] {
        let u = v.interpolate([x, 0.0], true).unwrap()[0];
        assert!((u - 2.0).abs() < 1e-6, "v({x}) = {u}");
    }
}

#[test]
fn velocity_of_spreading_gaussian() {
    let psi = propagate_free(&free_gaussian(), 2.0).unwrap();
    let v = velocity_field(&psi).unwrap();
    let u = v.interpolate([1.0, 0.0], true).unwrap()[0];
    // x (t/4) / (1 + t^2/4) at t = 2, x = 1
    assert!((u - 0.25).abs() < 1e-3, "{u}");
}

#[test]
fn free_gaussian_trajectory_scales_with_width() {
    let src = free_source(2.0);
    let s = IntegratorSettings::default();
    let traj = integrate_trajectory([1.0, 0.0], &src, 2.0, &s, prov(1.0)).unwrap();
    assert!((traj.final_position()[0] - 2f64.sqrt()).abs() < 1e-3);
    // whole path: X(t) = X(0) sqrt(1 + t^2 / 4)
    for (t, p) in traj.times.iter().zip(&traj.positions) {
        assert!((p[0] - (1.0 + t * t / 4.0).sqrt()).abs() < 1e-3);
    }
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn box_ground_state_particle_is_at_rest() {
    let src = StationarySource::new(&box_ground(), 10.0).unwrap();
    for x0 in [0.05, 0.3, 0.5, 0.91] {
        let traj = integrate_trajectory(
            [x0, 0.0],
            &src,
            10.0,
            &IntegratorSettings::default(),
            prov(x0),
        )
        .unwrap();
        assert!(traj.max_displacement() < 1e-8);
    }
}

#[test]
fn plane_wave_translates_uniformly() {
    let psi = windowed_plane_wave(2.0);
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
    let src = SnapshotSource::free_flight(&psi, &times).unwrap();
    let traj = integrate_trajectory(
        [0.0, 0.0],
        &src,
        1.0,
        &IntegratorSettings::default(),
        prov(0.0),
    )
    .unwrap();
    assert!((traj.final_position()[0] - 2.0).abs() < 1e-3);
}

#[test]
fn start_errors() {
    let src = StationarySource::new(&box_ground(), 1.0).unwrap();
    let s = IntegratorSettings::default();
    assert!(integrate_trajectory([5.0, 0.0], &src, 1.0, &s, prov(5.0)).is_err());
    // outside the box the density is zero: masked start
    assert!(integrate_trajectory([-0.3, 0.0], &src, 1.0, &s, prov(-0.3)).is_err());
}

#[test]
fn box_ensemble_stays_put() {
    let src = StationarySource::new(&box_ground(), 10.0).unwrap();
    let initial: Vec<[f64; 2]> = (0..10_000)
        .map(|i| [0.02 + 0.96 * (i as f64 + 0.5) / 1e4, 0.0])
        .collect();
    let ens = Ensemble::new(initial).unwrap();
    let run = evolve_ensemble(
        &ens,
        &src,
        10.0,
        &IntegratorSettings {
            outputs: 2,
            ..IntegratorSettings::default()
        },
        &EnsembleOptions::default(),
    )
    .unwrap();
    for (a, b) in run.ensemble.surviving() {
        assert!((a[0] - b[0]).abs() < 1e-8);
    }
    assert_eq!(run.ensemble.failures(), 0);
}

#[test]
fn one_dimensional_trajectories_keep_their_order() {
    let src = free_source(2.0);
    let initial: Vec<[f64; 2]> = (0..100)
        .map(|i| [-2.5 + 5.0 * i as f64 / 99.0, 0.0])
        .collect();
    let ens = Ensemble::new(initial).unwrap();
    let run = evolve_ensemble(
        &ens,
        &src,
        2.0,
        &IntegratorSettings::default(),
        &EnsembleOptions {
            keep_trajectories: 100,
            ..EnsembleOptions::default()
        },
    )
    .unwrap();
    let trajs: Vec<_> = run
        .trajectories
        .iter()
        .map(|t| t.as_ref().unwrap())
        .collect();
    for k in 0..trajs[0].times.len() {
        for w in trajs.windows(2) {
            assert!(w[0].positions[k][0] < w[1].positions[k][0]);
        }
    }
}

#[test]
fn zero_duration_leaves_ensemble_unchanged() {
    let src = free_source(0.1);
    let ens = Ensemble::new(vec![[0.5, 0.0], [1.0, 0.0]]).unwrap();
    let run = evolve_ensemble(
        &ens,
        &src,
        0.0,
        &IntegratorSettings::default(),
        &EnsembleOptions::default(),
    )
    .unwrap();
    assert_eq!(run.ensemble, ens);
}

#[test]
fn halving_tolerance_converges() {
    let src = free_source(2.0);
    for tol in [1e-5, 1e-6, 1e-7] {
        let a = integrate_trajectory(
            [1.3, 0.0],
            &src,
            2.0,
            &IntegratorSettings::with_tol(tol),
            prov(1.3),
        )
        .unwrap();
        let b = integrate_trajectory(
            [1.3, 0.0],
            &src,
            2.0,
            &IntegratorSettings::with_tol(tol / 2.0),
            prov(1.3),
        )
        .unwrap();
        let d = (a.final_position()[0] - b.final_position()[0]).abs();
        assert!(d < 10.0 * tol, "tol {tol}: {d:e}");
    }
}

#[test]
fn integration_is_deterministic() {
    let src = free_source(1.0);
    let s = IntegratorSettings::default();
    let a = integrate_trajectory([0.4, 0.0], &src, 1.0, &s, prov(0.4)).unwrap();
    let b = integrate_trajectory([0.4, 0.0], &src, 1.0, &s, prov(0.4)).unwrap();
    assert_eq!(a, b);
    assert!(src.t_end() >= 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_wave_functions_guide_particles_nowhere(
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, w in 0.5f64..1.5, a in -1.0f64..1.0, x0 in -2.0f64..2.0,
    ) {
        let g = Grid::new_1d(-15.0, 15.0, 256).unwrap();
        let amps = g.nodes().map(|p| {
            let x = p[0];
            Complex64::new((-(x - c1).powi(2) / (4.0 * w * w)).exp() + a * (-(x - c2).powi(2) / (4.0 * w * w)).exp(), 0.0)
        }).collect();
        let mut psi = WaveFunction::from_amplitudes(g, 1, amps, 0.0).unwrap();
        prop_assume!(psi.normalize().is_ok());
        let src = StationarySource::new(&psi, 10.0).unwrap();
        if let Ok(traj) = integrate_trajectory([x0, 0.0], &src, 10.0, &IntegratorSettings::default(), prov(x0)) {
            prop_assert!(traj.max_displacement() < 1e-8);
        }
    }
}
