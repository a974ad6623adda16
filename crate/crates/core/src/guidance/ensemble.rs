use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{
    integrate_trajectory, IntegratorSettings, Provenance, Trajectory, TrajectoryFlag,
};
use super::source::FieldSource;
use crate::error::{Error, Result};
use crate::numerics::Point;

/// Largest tolerated fraction of failed members.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum MemberStatus {
    Ok,
    NearNodeUnreliable,
    Failed(String),
}

impl MemberStatus {
    pub fn as_str(&self) -> &str {
        match self {
            MemberStatus::Ok => "ok",
            MemberStatus::NearNodeUnreliable => "near_node_unreliable",
            MemberStatus::Failed(_) => "failed",
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, MemberStatus::Failed(_))
    }
}

/// Particle positions sharing one clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub initial: Vec<Point>,
    pub current: Vec<Point>,
    pub status: Vec<MemberStatus>,
    pub time: f64,
}

impl Ensemble {
    pub fn new(initial: Vec<Point>) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::InvalidArgument(
                "an ensemble needs at least one member".into(),
            ));
        }
        Ok(Self {
            current: initial.clone(),
            status: vec![MemberStatus::Ok; initial.len()],
            initial,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.status.iter().filter(|s| s.is_failed()).count()
    }

    /// `(initial, current)` pairs of members that did not fail.
    pub fn surviving(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.initial
            .iter()
            .zip(&self.current)
            .zip(&self.status)
            .filter(|(_, s)| !s.is_failed())
            .map(|((a, b), _)| (*a, *b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    /// Keep full trajectories for the first `keep_trajectories` members.
    pub keep_trajectories: usize,
    pub seed: u64,
    pub experiment: String,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            keep_trajectories: 0,
            seed: 0,
            experiment: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub ensemble: Ensemble,
    /// Trajectories of the first `keep_trajectories` members (`None` where a member failed).
    pub trajectories: Vec<Option<Trajectory>>,
    pub flagged: usize,
}

/// Transports every member independently through `source` up to `t_final`.
///
/// Members run in parallel; output order always matches input order. The run
/// fails only when more than 1% of members fail.
pub fn evolve_ensemble<S: FieldSource + ?Sized>(
    ens: &Ensemble,
    source: &S,
    t_final: f64,
    settings: &IntegratorSettings,
    opts: &EnsembleOptions,
) -> Result<EnsembleRun> {
    if t_final == ens.time {
        return Ok(EnsembleRun {
            ensemble: ens.clone(),
            trajectories: Vec::new(),
            flagged: 0,
        });
    }
    if (ens.time - source.t_start()).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "ensemble clock {} does not match source start {}",
            ens.time,
            source.t_start()
        )));
    }
    let results: Vec<Result<Trajectory>> = ens
        .current
        .par_iter()
        .enumerate()
        .map(|(i, &x0)| {
            if ens.status[i].is_failed() {
                return Err(Error::InvalidArgument("member failed earlier".into()));
            }
            let provenance = Provenance {
                seed: opts.seed,
                initial: ens.initial[i],
                experiment: opts.experiment.clone(),
            };
            integrate_trajectory(x0, source, t_final, settings, provenance)
        })
        .collect();

    let mut out = ens.clone();
    out.time = t_final;
    let mut trajectories = Vec::with_capacity(opts.keep_trajectories.min(ens.len()));
    let mut flagged = 0;
    let mut first_failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(traj) => {
                out.current[i] = traj.final_position();
                if traj.flag == TrajectoryFlag::NearNodeUnreliable {
                    flagged += 1;
                    out.status[i] = MemberStatus::NearNodeUnreliable;
                }
                if i < opts.keep_trajectories {
                    trajectories.push(Some(traj));
                }
            }
            Err(e) => {
                if first_failure.is_none() {
                    first_failure = Some(format!("member {i}: {e}"));
                }
                out.status[i] = MemberStatus::Failed(e.to_string());
                if i < opts.keep_trajectories {
                    trajectories.push(None);
                }
            }
        }
    }
    let failed = out.failures();
    if failed as f64 > MAX_FAILURE_FRACTION * ens.len() as f64 {
        return Err(Error::EnsembleFailure {
            failed,
            total: ens.len(),
            first: first_failure.unwrap_or_default(),
        });
    }
    Ok(EnsembleRun {
        ensemble: out,
        trajectories,
        flagged,
    })
}
