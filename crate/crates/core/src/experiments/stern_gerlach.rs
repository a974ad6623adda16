use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{Check, ExperimentOutcome, MAX_EMITTED_TRAJECTORIES};
use crate::equilibrium::sample_born;
use crate::error::{Error, Result};
use crate::guidance::{
    evolve_ensemble, Ensemble, EnsembleOptions, IntegratorSettings, SnapshotSource,
};
use crate::numerics::{Evolver, Grid, Initializer, Orientation, Potential, WaveFunction};
use crate::rng::{derive_seed, stream};

/// Readout requires the packet centres to be this many packet widths apart.
pub const SEPARATION_WIDTHS: f64 = 6.0;

/// Where the particles start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Starts {
    /// Single-shot runs from given positions `z0`.
    Explicit { z0: Vec<f64> },
    /// `n` positions drawn from `|psi_0|^2`.
    Sampled { n: usize },
}

/// A spin-1/2 packet through an impulsive field gradient along `z`, then free flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SternGerlachConfig {
    pub c_up: Complex64,
    pub c_down: Complex64,
    pub center: f64,
    pub width: f64,
    pub coupling: f64,
    pub tau: f64,
    /// Free flight after the pulse.
    pub flight: f64,
    pub orientation: Orientation,
    pub starts: Starts,
    pub seed: u64,
    pub grid: (f64, f64, usize),
    /// Split-step time step during the pulse.
    pub dt: f64,
    pub snapshot_interval: f64,
    pub tol: f64,
    pub outputs: usize,
    pub keep_trajectories: usize,
}

impl Default for SternGerlachConfig {
    fn default() -> Self {
        Self {
            c_up: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_down: Complex64::new(FRAC_1_SQRT_2, 0.0),
            center: 0.0,
            width: 1.0,
            coupling: 5.0,
            tau: 0.5,
            flight: 5.0,
            orientation: Orientation::Normal,
            starts: Starts::Sampled { n: 10_000 },
            seed: 0,
            grid: (-40.0, 40.0, 1024),
            dt: 1e-3,
            snapshot_interval: 0.01,
            tol: 1e-6,
            outputs: 51,
            keep_trajectories: MAX_EMITTED_TRAJECTORIES,
        }
    }
}

impl SternGerlachConfig {
    pub fn validate(&self) -> Result<()> {
        let norm = self.c_up.norm_sqr() + self.c_down.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "|c_up|^2 + |c_down|^2 = {norm}, expected 1"
            )));
        }
        if !(self.width > 0.0 && self.coupling > 0.0 && self.tau > 0.0 && self.flight >= 0.0) {
            return Err(Error::InvalidArgument(
                "width, coupling and tau must be > 0, flight >= 0".into(),
            ));
        }
        if !(self.dt > 0.0 && self.snapshot_interval > 0.0) || self.outputs < 2 {
            return Err(Error::InvalidArgument(
                "dt, snapshot_interval > 0 and outputs >= 2 required".into(),
            ));
        }
        match &self.starts {
            Starts::Explicit { z0 } if z0.is_empty() => Err(Error::InvalidArgument(
                "single-shot mode needs at least one z0".into(),
            )),
            Starts::Sampled { n: 0 } => {
                Err(Error::InvalidArgument("ensemble size must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn initial_state(&self) -> Result<WaveFunction> {
        let grid = Grid::new_1d(self.grid.0, self.grid.1, self.grid.2)?;
        WaveFunction::new(
            grid,
            &Initializer::SpinorGaussian {
                c_up: self.c_up,
                c_down: self.c_down,
                center: self.center,
                width: self.width,
            },
        )
    }

    /// Apparatus label for a deflection: the field orientation decides which
    /// direction counts as "up".
    pub fn label(&self, deflected_up: bool) -> &'static str {
        match (deflected_up, self.orientation) {
            (true, Orientation::Normal) | (false, Orientation::Reversed) => "up",
            _ => "down",
        }
    }
}

/// Separation of the two component packets and the required minimum at readout.
fn packet_separation(psi: &WaveFunction) -> Option<(f64, f64)> {
    let xs = psi.grid().axis(0).coords();
    let mut moments = Vec::new();
    for c in 0..psi.components() {
        let rho = psi.component_density(c);
        let w: f64 = rho.iter().sum();
        if w <= 1e-12 * psi.density().iter().sum::<f64>() {
            continue;
        }
        let mean = rho.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>() / w;
        let var = rho
            .iter()
            .zip(&xs)
            .map(|(r, x)| r * (x - mean).powi(2))
            .sum::<f64>()
            / w;
        moments.push((mean, var.sqrt()));
    }
    if moments.len() < 2 {
        return None;
    }
    let sep = (moments[0].0 - moments[1].0).abs();
    let widest = moments[0].1.max(moments[1].1);
    Some((sep, SEPARATION_WIDTHS * widest))
}

pub fn run_stern_gerlach(cfg: &SternGerlachConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let psi0 = cfg.initial_state()?;
    let potential = Potential::SternGerlach {
        coupling: cfg.coupling,
        tau: cfg.tau,
        orientation: cfg.orientation,
    };
    let snaps = (cfg.tau / cfg.snapshot_interval).ceil().max(1.0) as usize;
    let stride = (cfg.tau / (snaps as f64 * cfg.dt)).ceil().max(1.0) as usize;
    let evolver = Evolver::new(psi0.grid(), potential, cfg.tau / (snaps * stride) as f64)?;
    let (pulse, psi_tau) = SnapshotSource::from_evolver(&psi0, &evolver, stride, snaps)?;
    let t_final = cfg.tau + cfg.flight;
    let source = if cfg.flight > 0.0 {
        let k = (cfg.flight / cfg.snapshot_interval).ceil() as usize;
        let times: Vec<f64> = (0..=k).map(|i| cfg.flight * i as f64 / k as f64).collect();
        pulse.chain(SnapshotSource::free_flight(&psi_tau, &times)?)?
    } else {
        pulse
    };
    let psi_end = crate::numerics::propagate_free(&psi_tau, cfg.flight)?;
    let separation = packet_separation(&psi_end);
    if let Some((sep, need)) = separation {
        if sep <= need {
            return Err(Error::PacketsNotSeparated {
                separation: sep,
                required: need,
            });
        }
    }

    let initial: Vec<[f64; 2]> = match &cfg.starts {
        Starts::Explicit { z0 } => z0.iter().map(|&z| [z, 0.0]).collect(),
        Starts::Sampled { n } => sample_born(&psi0, *n, cfg.seed)?,
    };
    let settings = IntegratorSettings {
        tol: cfg.tol,
        outputs: cfg.outputs,
        dt_max: cfg.snapshot_interval,
        ..IntegratorSettings::default()
    };
    let run = evolve_ensemble(
        &Ensemble::new(initial)?,
        &source,
        t_final,
        &settings,
        &EnsembleOptions {
            keep_trajectories: cfg.keep_trajectories,
            seed: cfg.seed,
            experiment: "stern_gerlach".into(),
        },
    )?;
    let ens = &run.ensemble;
    let labels: Vec<String> = ens
        .current
        .iter()
        .zip(&ens.status)
        .map(|(p, s)| {
            if s.is_failed() {
                "none".to_string()
            } else {
                cfg.label(p[0] > cfg.center).to_string()
            }
        })
        .collect();

    let counted = labels.iter().filter(|l| *l != "none").count();
    let ups = labels.iter().filter(|l| *l == "up").count();
    let freq_up = ups as f64 / counted.max(1) as f64;
    let born_up = cfg.c_up.norm_sqr();
    let mut summary = BTreeMap::new();
    summary.insert("freq_up".into(), freq_up);
    summary.insert("freq_down".into(), 1.0 - freq_up);
    summary.insert("born_up".into(), born_up);
    summary.insert("failed_members".into(), ens.failures() as f64);
    if let Some((sep, need)) = separation {
        summary.insert("separation".into(), sep);
        summary.insert("required_separation".into(), need);
    }

    let mut checks = Vec::new();
    if let Starts::Sampled { n } = cfg.starts {
        let band = 3.0 * (0.25 / n as f64).sqrt();
        checks.push(Check::new(
            "born_frequencies",
            (freq_up - born_up).abs() <= band,
            format!("up {freq_up:.4} vs |c_up|^2 {born_up:.4} (band {band:.4})"),
        ));
    }

    Ok(ExperimentOutcome {
        experiment: "stern_gerlach".into(),
        seed: cfg.seed,
        dims: 1,
        config: serde_json::to_value(cfg)?,
        initial: ens.initial.clone(),
        final_positions: ens.current.clone(),
        labels,
        values: None,
        status: ens.status.clone(),
        trajectories: run.trajectories.into_iter().flatten().collect(),
        summary,
        checks,
    })
}

/// Same inputs, both field orientations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualityReport {
    pub inputs: usize,
    pub z0: Vec<f64>,
    pub deflection_normal: Vec<bool>,
    pub deflection_reversed: Vec<bool>,
    pub labels_normal: Vec<String>,
    pub labels_reversed: Vec<String>,
    pub same_deflection: usize,
    pub label_negated: usize,
    pub pass: bool,
}

/// Draws `inputs` starting points from `|psi_0|^2` of `base` and runs each
/// single-shot under both orientations.
pub fn contextuality_witness(
    base: &SternGerlachConfig,
    inputs: usize,
) -> Result<ContextualityReport> {
    if inputs == 0 {
        return Err(Error::InvalidArgument("need at least one input".into()));
    }
    let psi0 = base.initial_state()?;
    let z0: Vec<f64> = sample_born(&psi0, inputs, derive_seed(base.seed, stream::INPUTS))?
        .iter()
        .map(|p| p[0])
        .collect();
    let run = |orientation| {
        run_stern_gerlach(&SternGerlachConfig {
            orientation,
            starts: Starts::Explicit { z0: z0.clone() },
            keep_trajectories: 0,
            ..base.clone()
        })
    };
    let normal = run(Orientation::Normal)?;
    let reversed = run(Orientation::Reversed)?;
    let up = |o: &ExperimentOutcome| -> Vec<bool> {
        o.final_positions
            .iter()
            .map(|p| p[0] > base.center)
            .collect()
    };
    let (dn, dr) = (up(&normal), up(&reversed));
    let alive = |o: &ExperimentOutcome, i: usize| !o.status[i].is_failed();
    let same_deflection = (0..inputs)
        .filter(|&i| alive(&normal, i) && alive(&reversed, i) && dn[i] == dr[i])
        .count();
    let label_negated = (0..inputs)
        .filter(|&i| {
            let (a, b) = (&normal.labels[i], &reversed.labels[i]);
            a != "none" && b != "none" && a != b
        })
        .count();
    Ok(ContextualityReport {
        inputs,
        z0,
        deflection_normal: dn,
        deflection_reversed: dr,
        labels_normal: normal.labels,
        labels_reversed: reversed.labels,
        same_deflection,
        label_negated,
        pass: same_deflection == inputs && label_negated == inputs,
    })
}
