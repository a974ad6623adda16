use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

use super::{bin_counts, count_maxima, smooth, Check, ExperimentOutcome, MAX_EMITTED_TRAJECTORIES};
use crate::equilibrium::{marginal_cdf, sample_born};
use crate::error::{Error, Result};
use crate::guidance::{
    evolve_ensemble, Ensemble, EnsembleOptions, IntegratorSettings, SnapshotSource,
};
use crate::numerics::{propagate_free, Grid, Initializer, WaveFunction};

/// Fraction of the histogram peak a fringe must reach, in height and prominence.
pub const FRINGE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slits {
    Both,
    Upper,
    Lower,
}

impl FromStr for Slits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Slits::Both),
            "upper" => Ok(Slits::Upper),
            "lower" => Ok(Slits::Lower),
            other => Err(Error::InvalidArgument(format!(
                "slits must be both|upper|lower, got `{other}`"
            ))),
        }
    }
}

/// Two coherent Gaussians released just behind the slits.
///
/// The run happens in the frame moving with the forward momentum `k`, where
/// the packet is at rest along x; lab coordinates are recovered as `x + k t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSlitConfig {
    /// Distance between the slit centres.
    pub separation: f64,
    /// Gaussian position spread of each slit packet.
    pub width: f64,
    pub momentum: f64,
    pub t_screen: f64,
    pub slits: Slits,
    pub members: usize,
    pub seed: u64,
    pub tol: f64,
    pub snapshot_interval: f64,
    /// Trajectory output times per member, endpoints included.
    pub outputs: usize,
    pub keep_trajectories: usize,
    /// Co-moving grid `(lo, hi, points)` along the forward axis.
    pub grid_x: (f64, f64, usize),
    /// Grid along the transverse axis.
    pub grid_y: (f64, f64, usize),
}

impl Default for DoubleSlitConfig {
    fn default() -> Self {
        Self {
            separation: 6.4,
            width: 0.8,
            momentum: 8.0,
            t_screen: 3.0,
            slits: Slits::Both,
            members: 10_000,
            seed: 0,
            tol: 1e-6,
            snapshot_interval: 0.02,
            outputs: 61,
            keep_trajectories: MAX_EMITTED_TRAJECTORIES,
            grid_x: (-16.0, 16.0, 64),
            grid_y: (-24.0, 24.0, 256),
        }
    }
}

impl DoubleSlitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !(self.separation > 4.0 * self.width) {
            return Err(Error::InvalidArgument(format!(
                "slits must be resolved: separation {} must exceed 4 x width {}",
                self.separation, self.width
            )));
        }
        if !(self.t_screen > 0.0) {
            return Err(Error::InvalidArgument("t_screen must be > 0".into()));
        }
        if self.members == 0 || self.outputs < 2 || !(self.snapshot_interval > 0.0) {
            return Err(Error::InvalidArgument(
                "members >= 1, outputs >= 2 and snapshot_interval > 0 required".into(),
            ));
        }
        Ok(())
    }

    /// Position spread of one packet at time `t`.
    pub fn spread_at(&self, t: f64) -> f64 {
        self.width * (1.0 + (t / (2.0 * self.width * self.width)).powi(2)).sqrt()
    }

    fn initializer(&self) -> Initializer {
        let d = 0.5 * self.separation;
        let single = |y: f64| Initializer::Gaussian {
            center: [0.0, y],
            width: self.width,
            momentum: [0.0, 0.0],
        };
        match self.slits {
            Slits::Both => Initializer::TwoGaussian {
                half_separation: d,
                width: self.width,
                momentum: 0.0,
            },
            Slits::Upper => single(d),
            Slits::Lower => single(-d),
        }
    }
}

fn side(y: f64) -> &'static str {
    if y >= 0.0 {
        "upper"
    } else {
        "lower"
    }
}

pub fn run_double_slit(cfg: &DoubleSlitConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let grid = Grid::new_2d(cfg.grid_x, cfg.grid_y)?;
    let psi0 = WaveFunction::new(grid, &cfg.initializer())?;
    let t = cfg.t_screen;
    let snaps = (t / cfg.snapshot_interval).ceil() as usize;
    let times: Vec<f64> = (0..=snaps).map(|i| t * i as f64 / snaps as f64).collect();
    let source = SnapshotSource::free_flight(&psi0, &times)?;
    let psi_t = propagate_free(&psi0, t)?;

    let initial = sample_born(&psi0, cfg.members, cfg.seed)?;
    let settings = IntegratorSettings {
        tol: cfg.tol,
        outputs: cfg.outputs,
        dt_max: cfg.snapshot_interval,
        ..IntegratorSettings::default()
    };
    let run = evolve_ensemble(
        &Ensemble::new(initial)?,
        &source,
        t,
        &settings,
        &EnsembleOptions {
            keep_trajectories: cfg.members,
            seed: cfg.seed,
            experiment: "double_slit".into(),
        },
    )?;
    let ens = &run.ensemble;

    // crossings of the symmetry axis along each kept trajectory
    let mut crossings = 0usize;
    let mut recovered = 0usize;
    let mut compared = 0usize;
    for (i, traj) in run.trajectories.iter().enumerate() {
        let Some(traj) = traj else { continue };
        let y0 = ens.initial[i][1];
        if traj.positions.iter().any(|p| side(p[1]) != side(y0)) {
            crossings += 1;
        }
        compared += 1;
        if side(traj.final_position()[1]) == side(y0) {
            recovered += 1;
        }
    }

    let k = cfg.momentum;
    let labels: Vec<String> = ens.initial.iter().map(|p| side(p[1]).to_string()).collect();
    let final_positions: Vec<[f64; 2]> = ens.current.iter().map(|p| [p[0] + k * t, p[1]]).collect();
    let trajectories = run
        .trajectories
        .iter()
        .take(cfg.keep_trajectories)
        .flatten()
        .map(|tr| {
            let mut tr = tr.clone();
            for (p, s) in tr.positions.iter_mut().zip(&tr.times) {
                p[0] += k * s;
            }
            tr
        })
        .collect();

    // transverse screen histogram and the same binning of |psi(t)|^2
    let half = 0.5 * cfg.separation + 5.0 * cfg.spread_at(t);
    let bins = ((2.0 * half) / (0.25 * cfg.spread_at(t))).ceil() as usize;
    let ys = ens.surviving().map(|(_, b)| b[1]);
    let hist = smooth(&bin_counts(ys, -half, half, bins), 1);
    let maxima = count_maxima(&hist, FRINGE_FRACTION);
    let cdf = marginal_cdf(&psi_t, 1);
    let w = 2.0 * half / bins as f64;
    let target: Vec<f64> = (0..bins)
        .map(|b| cdf.eval(-half + (b + 1) as f64 * w) - cdf.eval(-half + b as f64 * w))
        .collect();
    let target_maxima = count_maxima(&target, FRINGE_FRACTION);

    let n = ens.len();
    let failed = ens.failures();
    let mut summary = BTreeMap::new();
    summary.insert("maxima".into(), maxima as f64);
    summary.insert("target_maxima".into(), target_maxima as f64);
    summary.insert("nodal_crossings".into(), crossings as f64);
    summary.insert(
        "slit_recovery".into(),
        recovered as f64 / compared.max(1) as f64,
    );
    summary.insert("failed_members".into(), failed as f64);
    summary.insert("flagged_members".into(), run.flagged as f64);
    summary.insert(
        "upper_fraction".into(),
        ens.initial.iter().filter(|p| p[1] >= 0.0).count() as f64 / n as f64,
    );

    let mut checks = Vec::new();
    match cfg.slits {
        Slits::Both => {
            checks.push(Check::new(
                "no_nodal_crossings",
                crossings == 0,
                format!("{crossings} of {compared} trajectories crossed y = 0"),
            ));
            checks.push(Check::new(
                "fringes",
                maxima >= 3,
                format!("maxima={maxima}"),
            ));
            checks.push(Check::new(
                "slit_of_origin",
                recovered == compared && compared == n,
                format!("{recovered} of {n} recovered"),
            ));
        }
        _ => checks.push(Check::new(
            "single_maximum",
            maxima == 1,
            format!("maxima={maxima}"),
        )),
    }

    Ok(ExperimentOutcome {
        experiment: "double_slit".into(),
        seed: cfg.seed,
        dims: 2,
        config: serde_json::to_value(cfg)?,
        initial: ens.initial.clone(),
        final_positions,
        labels,
        values: None,
        status: ens.status.clone(),
        trajectories,
        summary,
        checks,
    })
}
