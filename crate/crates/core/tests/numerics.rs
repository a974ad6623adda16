use num_complex::Complex64;
use pilotwave::numerics::{
    energy, evolve, gradient, propagate_free, Evolver, Grid, Initializer, Potential, WaveFunction,
};

fn free_grid() -> Grid {
    Grid::new_1d(-20.0, 20.0, 512).unwrap()
}

#[test]
fn free_gaussian_spreads_analytically() {
    let psi = WaveFunction::new(free_grid(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
    let out = evolve(&psi, &Potential::Free, 1e-3, 1000).unwrap();
    let expect = 1.25f64.sqrt();
    assert!(
        (out.std_position(0) - expect).abs() < 1e-3,
        "{}",
        out.std_position(0)
    );
    assert!((out.time() - 1.0).abs() < 1e-12);
    assert!((out.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn harmonic_ground_state_is_stationary() {
    let g = Grid::new_1d(-10.0, 10.0, 256).unwrap();
    let psi = WaveFunction::new(g, &Initializer::harmonic_ground(1.0)).unwrap();
    let v = Potential::Harmonic { omega: 1.0 };
    let out = evolve(&psi, &v, 1e-4, 10_000).unwrap();
    let dev = out
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-8, "max | |psi_t| - |psi_0| | = {dev:e}");

    // density over t in [0, 10]
    let ev = Evolver::new(psi.grid(), v, 1e-3).unwrap();
    let rho0 = psi.density();
    let mut cur = psi.clone();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        ev.step_in_place(&mut cur, 1000).unwrap();
        let d = cur
            .density()
            .iter()
            .zip(&rho0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d);
    }
    assert!(worst < 1e-6, "stationarity drift {worst:e}");
}

#[test]
fn energy_is_conserved_for_static_potential() {
    let g = Grid::new_1d(-12.0, 12.0, 256).unwrap();
    let psi = WaveFunction::new(g, &Initializer::gaussian_1d(1.5, 0.8, 0.7)).unwrap();
    let v = Potential::Harmonic { omega: 1.0 };
    let e0 = energy(&psi, &v);
    let out = evolve(&psi, &v, 1e-3, 5000).unwrap();
    let e1 = energy(&out, &v);
    assert!(((e1 - e0) / e0).abs() < 1e-6, "{e0} -> {e1}");
}

#[test]
fn conjugate_evolution_reverses_time() {
    let g = Grid::new_1d(-15.0, 15.0, 256).unwrap();
    let psi = WaveFunction::new(g, &Initializer::gaussian_1d(-1.0, 1.0, 1.2)).unwrap();
    for v in [Potential::Free, Potential::Harmonic { omega: 0.7 }] {
        let fwd = evolve(&psi, &v, 2e-3, 1000).unwrap();
        let back = evolve(&fwd.conj(), &v, 2e-3, 1000).unwrap().conj();
        let dev = back
            .density()
            .iter()
            .zip(psi.density())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-6, "{v:?}: {dev:e}");
    }
}

#[test]
fn norm_is_preserved_over_many_steps() {
    let psi = WaveFunction::new(free_grid(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
    let out = evolve(&psi, &Potential::Free, 1e-3, 10_000).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn gradient_of_plane_wave_and_constant() {
    let g = Grid::new_1d(-20.0, 20.0, 512).unwrap();
    // exact plane wave with an integer number of periods on the periodic domain
    let k = 2.0 * std::f64::consts::PI * 10.0 / 40.0;
    let amps: Vec<Complex64> = g
        .nodes()
        .map(|p| Complex64::from_polar(0.1, k * p[0]))
        .collect();
    let psi = WaveFunction::from_amplitudes(g.clone(), 1, amps.clone(), 0.0).unwrap();
    let d = gradient(&psi);
    for (dz, z) in d.axes[0].iter().zip(&amps) {
        assert!((dz - Complex64::new(0.0, k) * z).norm() < 1e-6);
    }

    // windowed plane wave: interior agreement
    let amps: Vec<Complex64> = g
        .nodes()
        .map(|p| {
            let w = (-(p[0] / 10.0).powi(12)).exp();
            Complex64::from_polar(w, 2.0 * p[0])
        })
        .collect();
    let psi = WaveFunction::from_amplitudes(g.clone(), 1, amps.clone(), 0.0).unwrap();
    let d = gradient(&psi);
    for ((dz, z), p) in d.axes[0].iter().zip(&amps).zip(g.nodes()) {
        if p[0].abs() < 2.0 {
            assert!((dz - Complex64::new(0.0, 2.0) * z).norm() < 1e-6);
        }
    }

    let flat =
        WaveFunction::from_amplitudes(g, 1, vec![Complex64::new(0.2, -0.1); 512], 0.0).unwrap();
    assert!(gradient(&flat).axes[0].iter().all(|z| z.norm() < 1e-12));
}

/// Central-difference oracle, periodic.
fn central_difference(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|i| (values[(i + 1) % n] - values[(i + n - 1) % n]) / (2.0 * dx))
        .collect()
}

fn spectral_vs_fd(points: usize) -> f64 {
    // dx = 20.48 / points
    let g = Grid::new_1d(-10.24, 10.24, points).unwrap();
    let psi = WaveFunction::new(g.clone(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
    let spectral = &gradient(&psi).axes[0];
    let fd = central_difference(psi.amplitudes(), g.axis(0).spacing());
    spectral
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn gradient_agrees_with_finite_differences_to_second_order() {
    // dx = 0.04
    let coarse = spectral_vs_fd(512);
    assert!(coarse < 5e-4, "{coarse:e}");
    let errs: Vec<f64> = [256, 512, 1024, 2048]
        .iter()
        .map(|&n| spectral_vs_fd(n))
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate >= 1.9, "rate {rate} from {errs:?}");
    }
}

#[test]
fn free_propagation_is_exact_for_gaussians() {
    let psi = WaveFunction::new(free_grid(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
    let out = propagate_free(&psi, 2.0).unwrap();
    assert!((out.std_position(0) - 2f64.sqrt()).abs() < 1e-6);
}
