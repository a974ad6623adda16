use serde::{Deserialize, Serialize};

use super::sampler::sample_born;
use super::stats::{ks_statistic, ks_threshold, Histogram, TabulatedCdf};
use crate::error::{Error, Result};
use crate::guidance::{
    evolve_ensemble, Ensemble, EnsembleOptions, IntegratorSettings, SnapshotSource,
};
use crate::numerics::{propagate_free, Evolver, Potential, WaveFunction};

/// Absolute KS floor absorbing integrator and grid bias.
pub const KS_FLOOR: f64 = 2e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSettings {
    /// Split-step time step (ignored for free flight, which is exact).
    pub dt: f64,
    /// Spacing of stored velocity snapshots.
    pub snapshot_interval: f64,
    pub integrator: IntegratorSettings,
}

impl Default for TransportSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            snapshot_interval: 1e-2,
            integrator: IntegratorSettings {
                tol: 1e-6,
                outputs: 2,
                ..IntegratorSettings::default()
            },
        }
    }
}

/// Guidance field of `psi0` evolving under `potential` on `[0, t]`, and `psi(t)`.
pub fn transport_source(
    psi0: &WaveFunction,
    potential: &Potential,
    t: f64,
    settings: &TransportSettings,
) -> Result<(SnapshotSource, WaveFunction)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transport time must be > 0, got {t}"
        )));
    }
    let snapshots = (t / settings.snapshot_interval).ceil().max(1.0) as usize;
    if matches!(potential, Potential::Free) {
        let times: Vec<f64> = (0..=snapshots)
            .map(|i| t * i as f64 / snapshots as f64)
            .collect();
        let source = SnapshotSource::free_flight(psi0, &times)?;
        return Ok((source, propagate_free(psi0, t)?));
    }
    let stride = (t / (snapshots as f64 * settings.dt)).ceil().max(1.0) as usize;
    let dt = t / (snapshots * stride) as f64;
    let evolver = Evolver::new(psi0.grid(), potential.clone(), dt)?;
    SnapshotSource::from_evolver(psi0, &evolver, stride, snapshots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub experiment: String,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    /// Largest per-axis KS distance at time `t`.
    pub ks: f64,
    pub ks_per_axis: Vec<f64>,
    /// KS distance of the untransported samples against `|psi_0|^2`.
    pub ks_initial: f64,
    pub threshold: f64,
    pub pass: bool,
    pub failed_members: usize,
    /// Histogram of the last axis at time `t`.
    pub histogram: Histogram,
}

/// Marginal CDF of `|psi|^2` along `axis`.
pub fn marginal_cdf(psi: &WaveFunction, axis: usize) -> TabulatedCdf {
    TabulatedCdf::new(psi.grid().axis(axis).coords(), &psi.marginal(axis))
}

/// Samples `|psi0|^2`, transports the samples along the guidance flow to `t`
/// and compares them with `|psi(t)|^2`.
pub fn equivariance_check(
    experiment: &str,
    psi0: &WaveFunction,
    potential: &Potential,
    t: f64,
    n: usize,
    seed: u64,
    settings: &TransportSettings,
) -> Result<EquivarianceReport> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!(
            "equivariance checks need n >= 1000, got {n}"
        )));
    }
    let (source, psi_t) = transport_source(psi0, potential, t, settings)?;
    let initial = sample_born(psi0, n, seed)?;
    let dims = psi0.grid().dims();

    let ks_initial = (0..dims)
        .map(|a| {
            let cdf = marginal_cdf(psi0, a);
            let xs: Vec<f64> = initial.iter().map(|p| p[a]).collect();
            ks_statistic(&xs, |x| cdf.eval(x))
        })
        .fold(0.0, f64::max);

    let ens = Ensemble::new(initial)?;
    let run = evolve_ensemble(
        &ens,
        &source,
        t,
        &settings.integrator,
        &EnsembleOptions {
            keep_trajectories: 0,
            seed,
            experiment: experiment.to_string(),
        },
    )?;
    let finals: Vec<[f64; 2]> = run.ensemble.surviving().map(|(_, b)| b).collect();

    let mut ks_per_axis = Vec::with_capacity(dims);
    let mut histogram = None;
    for a in 0..dims {
        let cdf = marginal_cdf(&psi_t, a);
        let xs: Vec<f64> = finals.iter().map(|p| p[a]).collect();
        ks_per_axis.push(ks_statistic(&xs, |x| cdf.eval(x)));
        if a == dims - 1 {
            let (lo, hi) = (cdf.quantile(1e-4), cdf.quantile(1.0 - 1e-4));
            histogram = Some(Histogram::build(&xs, lo, hi, &cdf));
        }
    }
    let ks = ks_per_axis.iter().copied().fold(0.0, f64::max);
    let threshold = ks_threshold(finals.len(), KS_FLOOR);
    Ok(EquivarianceReport {
        experiment: experiment.to_string(),
        t,
        n,
        seed,
        ks,
        ks_per_axis,
        ks_initial,
        threshold,
        pass: ks < threshold,
        failed_members: run.ensemble.failures(),
        histogram: histogram.expect("at least one axis"),
    })
}
