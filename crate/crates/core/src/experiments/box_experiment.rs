use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{mean_std, Check, ExperimentOutcome, MAX_EMITTED_TRAJECTORIES};
use crate::equilibrium::{ks_statistic, sample_born, TabulatedCdf};
use crate::error::{Error, Result};
use crate::guidance::{
    evolve_ensemble, velocity_field, Ensemble, EnsembleOptions, IntegratorSettings, SnapshotSource,
    StationarySource,
};
use crate::numerics::{Grid, Initializer, Spectral, WaveFunction};

pub const REST_SPEED_LIMIT: f64 = 1e-10;
pub const REST_DISPLACEMENT_LIMIT: f64 = 1e-8;
pub const MOMENTUM_KS_LIMIT: f64 = 5e-2;
/// `0.5 (1 - 5e-2)`: the uncertainty bound with the sampling allowance.
pub const UNCERTAINTY_FLOOR: f64 = 0.475;

/// A particle in the box `[0, L]`, at rest in eigenstate `n`, then released.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxExperimentConfig {
    pub length: f64,
    pub n: usize,
    /// Free flight time after the walls are removed.
    pub flight: f64,
    pub members: usize,
    pub seed: u64,
    pub tol: f64,
    /// Grid resolution of the flight grid.
    pub points_per_unit: f64,
    /// The flight grid holds every member slower than this many `n pi / L`.
    pub speed_cutoff: f64,
    /// In-box trajectories integrated for the rest check.
    pub rest_members: usize,
    pub rest_time: f64,
    pub keep_trajectories: usize,
}

impl Default for BoxExperimentConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            n: 1,
            flight: 5.0,
            members: 100_000,
            seed: 0,
            tol: 1e-4,
            points_per_unit: 64.0,
            speed_cutoff: 4.0,
            rest_members: MAX_EMITTED_TRAJECTORIES,
            rest_time: 10.0,
            keep_trajectories: MAX_EMITTED_TRAJECTORIES,
        }
    }
}

impl BoxExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || self.n == 0 {
            return Err(Error::InvalidArgument(
                "box length must be > 0 and n >= 1".into(),
            ));
        }
        if !(self.flight > 0.0) {
            return Err(Error::InvalidArgument("flight time T must be > 0".into()));
        }
        if self.members == 0 || !(self.points_per_unit > 0.0) || !(self.speed_cutoff >= 1.0) {
            return Err(Error::InvalidArgument(
                "members >= 1, points_per_unit > 0 and speed_cutoff >= 1 required".into(),
            ));
        }
        Ok(())
    }

    /// Typical momentum `n pi / L` of the eigenstate.
    pub fn momentum_scale(&self) -> f64 {
        self.n as f64 * PI / self.length
    }

    /// Flight grid centred on the box; extent `L + 2 cutoff p T` rounded up to a power-of-two node count.
    pub fn flight_grid(&self) -> Result<Grid> {
        let spread = self.speed_cutoff * self.momentum_scale() * self.flight;
        let needed = ((self.length + 2.0 * spread) * self.points_per_unit).ceil() as usize;
        let points = needed.next_power_of_two();
        let width = points as f64 / self.points_per_unit;
        let mid = 0.5 * self.length;
        Grid::new_1d(mid - 0.5 * width, mid + 0.5 * width, points)
    }
}

/// CDF of the momentum density `|psi_hat(p)|^2`, from the DFT of `psi` on its own grid.
pub fn momentum_cdf(psi: &WaveFunction) -> TabulatedCdf {
    let grid = psi.grid();
    let spectral = Spectral::new(grid);
    let mut ks = grid.axis(0).wavenumbers();
    let mut density = vec![0.0; ks.len()];
    for c in 0..psi.components() {
        let mut block = psi.component(c).to_vec();
        spectral.forward(&mut block);
        for (d, z) in density.iter_mut().zip(&block) {
            *d += z.norm_sqr();
        }
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by(|&a, &b| ks[a].total_cmp(&ks[b]));
    let sorted_density: Vec<f64> = order.iter().map(|&i| density[i]).collect();
    ks = order.iter().map(|&i| ks[i]).collect();
    TabulatedCdf::new(ks, &sorted_density)
}

/// Snapshot times for free flight: dense while the released state changes fast, then geometric.
fn flight_times(t: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut s: f64 = 0.0;
    while s < t {
        s += (0.03 * s).clamp(2e-3, 0.1);
        times.push(s.min(t));
    }
    times
}

pub fn run_box_experiment(cfg: &BoxExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let grid = cfg.flight_grid()?;
    let psi0 = WaveFunction::new(
        grid,
        &Initializer::BoxEigenstate {
            n: cfg.n,
            a: 0.0,
            b: cfg.length,
        },
    )?;

    // phase 1: inside the box
    let in_box = velocity_field(&psi0)?;
    let max_speed = in_box.max_unmasked_speed();
    let initial = sample_born(&psi0, cfg.members, cfg.seed)?;
    let rest_n = cfg.rest_members.min(cfg.members);
    let mut rest_trajectories = Vec::new();
    let mut max_rest_displacement = 0.0f64;
    if rest_n > 0 {
        let rest = evolve_ensemble(
            &Ensemble::new(initial[..rest_n].to_vec())?,
            &StationarySource::new(&psi0, cfg.rest_time)?,
            cfg.rest_time,
            &IntegratorSettings {
                tol: cfg.tol,
                ..IntegratorSettings::default()
            },
            &EnsembleOptions {
                keep_trajectories: rest_n,
                seed: cfg.seed,
                experiment: "box_rest".into(),
            },
        )?;
        for tr in rest.trajectories.iter().flatten() {
            max_rest_displacement = max_rest_displacement.max(tr.max_displacement());
        }
        rest_trajectories = rest
            .trajectories
            .into_iter()
            .flatten()
            .take(cfg.keep_trajectories)
            .collect();
    }

    // phase 2: walls removed, free flight
    let source = SnapshotSource::free_flight(&psi0, &flight_times(cfg.flight))?;
    let run = evolve_ensemble(
        &Ensemble::new(initial)?,
        &source,
        cfg.flight,
        &IntegratorSettings {
            tol: cfg.tol,
            outputs: 2,
            ..IntegratorSettings::default()
        },
        &EnsembleOptions {
            keep_trajectories: 0,
            seed: cfg.seed,
            experiment: "box".into(),
        },
    )?;
    let ens = &run.ensemble;
    let velocities: Vec<f64> = ens
        .initial
        .iter()
        .zip(&ens.current)
        .map(|(a, b)| (b[0] - a[0]) / cfg.flight)
        .collect();
    let (x0s, vs): (Vec<f64>, Vec<f64>) = ens
        .surviving()
        .map(|(a, b)| (a[0], (b[0] - a[0]) / cfg.flight))
        .unzip();

    let cdf = momentum_cdf(&psi0);
    let ks = ks_statistic(&vs, |p| cdf.eval(p));
    let (_, std_x) = mean_std(&x0s);
    let (mean_v, std_v) = mean_std(&vs);
    let product = std_x * std_v;
    let spread_floor = 0.1 * 0.5 * PI / cfg.length;

    let mut summary = BTreeMap::new();
    summary.insert("in_box_max_speed".into(), max_speed);
    summary.insert("rest_max_displacement".into(), max_rest_displacement);
    summary.insert("ks_momentum".into(), ks);
    summary.insert("mean_velocity".into(), mean_v);
    summary.insert("std_velocity".into(), std_v);
    summary.insert("std_position".into(), std_x);
    summary.insert("uncertainty_product".into(), product);
    summary.insert("failed_members".into(), ens.failures() as f64);
    summary.insert("flagged_members".into(), run.flagged as f64);
    summary.insert("grid_points".into(), psi0.grid().len() as f64);

    let checks = vec![
        Check::new(
            "in_box_at_rest",
            max_speed < REST_SPEED_LIMIT,
            format!("max |v| = {max_speed:e}"),
        ),
        Check::new(
            "rest_trajectories",
            max_rest_displacement < REST_DISPLACEMENT_LIMIT,
            format!(
                "max displacement {max_rest_displacement:e} over t = {}",
                cfg.rest_time
            ),
        ),
        Check::new(
            "velocity_spread",
            std_v > spread_floor,
            format!("std(v) = {std_v:.4}"),
        ),
        Check::new(
            "momentum_distribution",
            ks < MOMENTUM_KS_LIMIT,
            format!("KS = {ks:.4} at T = {}", cfg.flight),
        ),
        Check::new(
            "uncertainty_product",
            product >= UNCERTAINTY_FLOOR,
            format!("std(X) std(v) = {product:.4}"),
        ),
    ];

    let labels = ens
        .status
        .iter()
        .map(|s| if s.is_failed() { "failed" } else { "released" }.to_string())
        .collect();

    Ok(ExperimentOutcome {
        experiment: "box".into(),
        seed: cfg.seed,
        dims: 1,
        config: serde_json::to_value(cfg)?,
        initial: ens.initial.clone(),
        final_positions: ens.current.clone(),
        labels,
        values: Some(velocities),
        status: ens.status.clone(),
        trajectories: rest_trajectories,
        summary,
        checks,
    })
}
