//! Split-step (Strang) propagation: half kinetic, full potential, half kinetic.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::grid::Grid;
use super::potential::Potential;
use super::spectral::Spectral;
use super::wavefunction::WaveFunction;
use crate::error::{Error, Result};

/// Bound on `dt * max|V|`.
pub const MAX_POTENTIAL_PHASE: f64 = 0.5;
/// Bound on `dt * k_max^2 / 2`.
pub const MAX_KINETIC_PHASE: f64 = PI;

/// Fraction of each axis covered by the optional absorbing ramp.
const MASK_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Evolver {
    grid: Grid,
    potential: Potential,
    dt: f64,
    spectral: Spectral,
    k2: Vec<f64>,
    mask: Option<Vec<f64>>,
}

impl Evolver {
    pub fn new(grid: &Grid, potential: Potential, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(Self {
            spectral: Spectral::new(grid),
            k2: grid.k_squared(),
            grid: grid.clone(),
            potential,
            dt,
            mask: None,
        })
    }

    /// Enables a cos^2 absorbing ramp over the outer 10% of every axis. Norm
    /// is not restored afterwards; callers read the loss from `psi.norm()`.
    pub fn with_absorbing_mask(mut self, on: bool) -> Self {
        self.mask = on.then(|| absorbing_mask(&self.grid));
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn check_stability(&self, components: usize) -> Result<()> {
        let vmax = self.potential.max_abs(&self.grid, components);
        let pot_phase = self.dt * vmax;
        if pot_phase >= MAX_POTENTIAL_PHASE {
            return Err(Error::Stability(format!(
                "dt * max|V| = {pot_phase:.4} >= {MAX_POTENTIAL_PHASE}"
            )));
        }
        let kin_phase = self.dt * self.grid.max_kinetic();
        if kin_phase >= MAX_KINETIC_PHASE {
            return Err(Error::Stability(format!(
                "dt * k_max^2 / 2 = {kin_phase:.4} >= pi"
            )));
        }
        Ok(())
    }

    /// Advances `psi` by `steps * dt` in place.
    pub fn step_in_place(&self, psi: &mut WaveFunction, steps: usize) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::InvalidArgument(
                "wave function lives on a different grid".into(),
            ));
        }
        self.potential.validate(&self.grid, psi.components())?;
        self.check_stability(psi.components())?;
        if steps == 0 {
            return Ok(());
        }
        let n = self.grid.len();
        let comps = psi.components();
        let half = kinetic_phases(&self.k2, 0.5 * self.dt);
        let full = kinetic_phases(&self.k2, self.dt);
        let static_phases = if self.potential.is_time_dependent() {
            None
        } else {
            Some(self.potential_phases(comps, 0.0))
        };
        let t0 = psi.time();

        for c in 0..comps {
            self.kinetic(&mut psi.amplitudes_mut()[c * n..(c + 1) * n], &half);
        }
        for s in 0..steps {
            let t_mid = t0 + (s as f64 + 0.5) * self.dt;
            let owned;
            let phases = match &static_phases {
                Some(p) => p,
                None => {
                    owned = self.potential_phases(comps, t_mid);
                    &owned
                }
            };
            let amps = psi.amplitudes_mut();
            for (z, ph) in amps.iter_mut().zip(phases) {
                *z *= ph;
            }
            let last = s + 1 == steps;
            for c in 0..comps {
                let block = &mut amps[c * n..(c + 1) * n];
                self.kinetic(block, if last { &half } else { &full });
                if let Some(mask) = &self.mask {
                    for (z, m) in block.iter_mut().zip(mask) {
                        *z *= *m;
                    }
                }
            }
            if amps.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite { step: s });
            }
        }
        psi.set_time(t0 + steps as f64 * self.dt);
        Ok(())
    }

    pub fn run(&self, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
        let mut out = psi.clone();
        self.step_in_place(&mut out, steps)?;
        Ok(out)
    }

    fn kinetic(&self, block: &mut [Complex64], phases: &[Complex64]) {
        self.spectral.forward(block);
        for (z, p) in block.iter_mut().zip(phases) {
            *z *= p;
        }
        self.spectral.inverse(block);
    }

    fn potential_phases(&self, comps: usize, t: f64) -> Vec<Complex64> {
        (0..comps)
            .flat_map(|c| self.potential.values(&self.grid, c, t))
            .map(|v| Complex64::from_polar(1.0, -v * self.dt))
            .collect()
    }
}

fn kinetic_phases(k2: &[f64], dt: f64) -> Vec<Complex64> {
    k2.iter()
        .map(|k| Complex64::from_polar(1.0, -0.5 * k * dt))
        .collect()
}

fn absorbing_mask(grid: &Grid) -> Vec<f64> {
    let ramp = |axis: usize, x: f64| {
        let a = grid.axis(axis);
        let width = MASK_FRACTION * a.length();
        let d = (x - a.lo).min(a.hi - x);
        if d >= width {
            1.0
        } else {
            (0.5 * PI * d / width).sin().powi(2).max(0.0)
        }
    };
    grid.nodes()
        .map(|p| (0..grid.dims()).map(|a| ramp(a, p[a])).product())
        .collect()
}

/// Split-step evolution of `psi` under `potential` for `steps` steps of `dt`.
pub fn evolve(
    psi: &WaveFunction,
    potential: &Potential,
    dt: f64,
    steps: usize,
) -> Result<WaveFunction> {
    Evolver::new(psi.grid(), potential.clone(), dt)?.run(psi, steps)
}

/// Exact free propagation by time `t` (kinetic operator diagonal in k-space).
pub fn propagate_free(psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
    propagate_free_with(&Spectral::new(psi.grid()), &psi.grid().k_squared(), psi, t)
}

pub(crate) fn propagate_free_with(
    spectral: &Spectral,
    k2: &[f64],
    psi: &WaveFunction,
    t: f64,
) -> Result<WaveFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "free flight time must be >= 0, got {t}"
        )));
    }
    let mut out = psi.clone();
    if t == 0.0 {
        return Ok(out);
    }
    let phases = kinetic_phases(k2, t);
    let n = psi.grid().len();
    for c in 0..psi.components() {
        let block = &mut out.amplitudes_mut()[c * n..(c + 1) * n];
        spectral.forward(block);
        for (z, p) in block.iter_mut().zip(&phases) {
            *z *= p;
        }
        spectral.inverse(block);
    }
    if !out.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    out.set_time(psi.time() + t);
    Ok(out)
}

/// Energy expectation `<T> + <V>` at the wave function's own time.
pub fn energy(psi: &WaveFunction, potential: &Potential) -> f64 {
    let grid = psi.grid();
    let spectral = Spectral::new(grid);
    let k2 = grid.k_squared();
    let mut kinetic = 0.0;
    let mut pot = 0.0;
    let mut total = 0.0;
    for c in 0..psi.components() {
        let mut block = psi.component(c).to_vec();
        spectral.forward(&mut block);
        let spec_norm: f64 = block.iter().map(|z| z.norm_sqr()).sum();
        kinetic += block
            .iter()
            .zip(&k2)
            .map(|(z, k)| 0.5 * k * z.norm_sqr())
            .sum::<f64>()
            / spec_norm.max(f64::MIN_POSITIVE)
            * psi.component(c).iter().map(|z| z.norm_sqr()).sum::<f64>();
        let v = potential.values(grid, c, psi.time());
        pot += psi
            .component(c)
            .iter()
            .zip(&v)
            .map(|(z, v)| v * z.norm_sqr())
            .sum::<f64>();
        total += psi.component(c).iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    (kinetic + pot) / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::wavefunction::Initializer;

    #[test]
    fn zero_steps_is_identity() {
        let g = Grid::new_1d(-10.0, 10.0, 128).unwrap();
        let psi = WaveFunction::new(g, &Initializer::gaussian_1d(0.0, 1.0, 1.0)).unwrap();
        let out = evolve(&psi, &Potential::Harmonic { omega: 1.0 }, 1e-3, 0).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn stability_preconditions() {
        let g = Grid::new_1d(-10.0, 10.0, 512).unwrap();
        let psi = WaveFunction::new(g, &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
        // k_max^2 / 2 = 3232 on this grid
        assert!(matches!(
            evolve(&psi, &Potential::Free, 1e-3, 1),
            Err(Error::Stability(_))
        ));
        assert!(matches!(
            evolve(&psi, &Potential::hard_box(-1.0, 1.0), 1e-4, 1),
            Err(Error::Stability(_))
        ));
        assert!(evolve(&psi, &Potential::Free, -1.0, 1).is_err());
    }

    #[test]
    fn non_finite_potential_is_rejected() {
        let g = Grid::new_1d(-10.0, 10.0, 64).unwrap();
        let psi = WaveFunction::new(g.clone(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
        let mut table = vec![0.0; 64];
        table[3] = f64::NAN;
        let v = Potential::Custom {
            values: vec![table],
        };
        assert!(matches!(
            evolve(&psi, &v, 1e-3, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn free_propagation_matches_split_step() {
        let g = Grid::new_1d(-20.0, 20.0, 256).unwrap();
        let psi = WaveFunction::new(g, &Initializer::gaussian_1d(-2.0, 1.0, 1.5)).unwrap();
        let a = evolve(&psi, &Potential::Free, 1e-2, 100).unwrap();
        let b = propagate_free(&psi, 1.0).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn absorbing_mask_reports_norm_loss() {
        let g = Grid::new_1d(-10.0, 10.0, 256).unwrap();
        let psi = WaveFunction::new(g.clone(), &Initializer::gaussian_1d(0.0, 1.0, 5.0)).unwrap();
        let ev = Evolver::new(&g, Potential::Free, 1e-3)
            .unwrap()
            .with_absorbing_mask(true);
        let out = ev.run(&psi, 2000).unwrap();
        assert!(out.norm() < 0.9);
    }
}
