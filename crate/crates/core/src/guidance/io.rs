//! CSV writers for trajectories and ensemble snapshots, plus the JSON run stamp.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::ensemble::Ensemble;
use super::integrate::{IntegratorSettings, Trajectory};
use crate::numerics::Grid;

/// Sidecar written next to every trajectory/ensemble output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStamp {
    pub seed: u64,
    pub integrator: IntegratorSettings,
    pub grid: Grid,
    pub solver: serde_json::Value,
}

/// Columns `t, x[, y], flag`.
pub fn trajectory_csv(traj: &Trajectory, dims: usize) -> String {
    let mut out = String::from(if dims == 2 {
        "t,x,y,flag\n"
    } else {
        "t,x,flag\n"
    });
    for (t, p) in traj.times.iter().zip(&traj.positions) {
        let _ = write!(out, "{t:e},{:e}", p[0]);
        if dims == 2 {
            let _ = write!(out, ",{:e}", p[1]);
        }
        let _ = writeln!(out, ",{}", traj.flag.as_str());
    }
    out
}

/// Columns `id, x0[, y0], x_t[, y_t], flag`.
pub fn ensemble_csv(ens: &Ensemble, dims: usize) -> String {
    let mut out = String::from(if dims == 2 {
        "id,x0,y0,x_t,y_t,flag\n"
    } else {
        "id,x0,x_t,flag\n"
    });
    for (i, ((a, b), s)) in ens
        .initial
        .iter()
        .zip(&ens.current)
        .zip(&ens.status)
        .enumerate()
    {
        if dims == 2 {
            let _ = writeln!(
                out,
                "{i},{:e},{:e},{:e},{:e},{}",
                a[0],
                a[1],
                b[0],
                b[1],
                s.as_str()
            );
        } else {
            let _ = writeln!(out, "{i},{:e},{:e},{}", a[0], b[0], s.as_str());
        }
    }
    out
}
