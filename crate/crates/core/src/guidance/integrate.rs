//! Adaptive RK4 integration of `dX/dt = v(X, t)`.
//!
//! Each attempt takes one full step and two half steps; the difference is the
//! local error estimate. Steps are halved when the estimate exceeds `tol`,
//! when the particle would sample a masked (near-node) region, or when the
//! velocity changes by more than half its magnitude across the step.

use serde::{Deserialize, Serialize};

use super::source::{FieldSource, Sample};
use crate::error::{Error, Result};
use crate::numerics::Point;

/// Smallest step the integrator will shrink to.
pub const DT_MIN: f64 = 1e-6;
/// Trajectories forced through more `DT_MIN` steps than this are flagged.
pub const MAX_DT_MIN_HITS: usize = 100;
/// Largest relative velocity change accepted across one step.
const MAX_RELATIVE_DV: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Local error tolerance on position per step.
    pub tol: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    /// Upper bound on the step; the source's own `max_step` also applies.
    pub dt_max: f64,
    /// Number of uniformly spaced output times, endpoints included.
    pub outputs: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            dt_initial: 1e-2,
            dt_min: DT_MIN,
            dt_max: 0.1,
            outputs: 101,
        }
    }
}

impl IntegratorSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryFlag {
    Ok,
    NearNodeUnreliable,
}

impl TrajectoryFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryFlag::Ok => "ok",
            TrajectoryFlag::NearNodeUnreliable => "near_node_unreliable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub initial: Point,
    pub experiment: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub dt_min_hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Point>,
    pub provenance: Provenance,
    pub stats: StepStats,
    pub flag: TrajectoryFlag,
}

impl Trajectory {
    pub fn final_position(&self) -> Point {
        *self.positions.last().unwrap()
    }

    pub fn initial_position(&self) -> Point {
        self.positions[0]
    }

    /// Largest displacement from the starting point over all outputs.
    pub fn max_displacement(&self) -> f64 {
        let p0 = self.positions[0];
        self.positions
            .iter()
            .map(|p| (p[0] - p0[0]).hypot(p[1] - p0[1]))
            .fold(0.0, f64::max)
    }
}

struct Stepper<'a, S: ?Sized> {
    source: &'a S,
}

enum Attempt {
    Ok {
        x: Point,
        err: f64,
        v0: Point,
        v1: Point,
    },
    Masked,
}

impl<S: FieldSource + ?Sized> Stepper<'_, S> {
    fn eval(&self, p: Point, t: f64, strict: bool) -> Option<Point> {
        if !self.source.grid().contains(p) {
            return None;
        }
        match self.source.sample(p, t, strict) {
            Sample::Velocity(v) => Some(v),
            Sample::Masked => None,
        }
    }

    fn rk4(&self, x: Point, t: f64, h: f64, k1: Point, strict: bool) -> Option<Point> {
        let add = |p: Point, k: Point, s: f64| [p[0] + s * k[0], p[1] + s * k[1]];
        let k2 = self.eval(add(x, k1, 0.5 * h), t + 0.5 * h, strict)?;
        let k3 = self.eval(add(x, k2, 0.5 * h), t + 0.5 * h, strict)?;
        let k4 = self.eval(add(x, k3, h), t + h, strict)?;
        Some([
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ])
    }

    fn attempt(&self, x: Point, t: f64, h: f64, strict: bool) -> Attempt {
        let Some(k1) = self.eval(x, t, strict) else {
            return Attempt::Masked;
        };
        let Some(full) = self.rk4(x, t, h, k1, strict) else {
            return Attempt::Masked;
        };
        let Some(half) = self.rk4(x, t, 0.5 * h, k1, strict) else {
            return Attempt::Masked;
        };
        let Some(km) = self.eval(half, t + 0.5 * h, strict) else {
            return Attempt::Masked;
        };
        let Some(two) = self.rk4(half, t + 0.5 * h, 0.5 * h, km, strict) else {
            return Attempt::Masked;
        };
        let Some(v1) = self.eval(two, t + h, strict) else {
            return Attempt::Masked;
        };
        let err = (two[0] - full[0]).abs().max((two[1] - full[1]).abs()) / 15.0;
        Attempt::Ok {
            x: two,
            err,
            v0: k1,
            v1,
        }
    }
}

/// Integrates one trajectory from `x0` at the source's start time to `t_final`.
pub fn integrate_trajectory<S: FieldSource + ?Sized>(
    x0: Point,
    source: &S,
    t_final: f64,
    settings: &IntegratorSettings,
    provenance: Provenance,
) -> Result<Trajectory> {
    let t0 = source.t_start();
    if !(settings.tol > 0.0) || settings.outputs < 2 {
        return Err(Error::InvalidArgument(
            "tol must be > 0 and outputs >= 2".into(),
        ));
    }
    if t_final < t0 || t_final > source.t_end() + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "t_final {t_final} outside the source window [{t0}, {}]",
            source.t_end()
        )));
    }
    if !source.grid().contains(x0) {
        return Err(Error::LeftGrid {
            t: t0,
            position: x0,
        });
    }
    let stepper = Stepper { source };
    if stepper.eval(x0, t0, true).is_none() {
        return Err(Error::StartInNode(x0));
    }

    let mut times = vec![t0];
    let mut positions = vec![x0];
    let mut stats = StepStats::default();
    if t_final == t0 {
        return Ok(Trajectory {
            times,
            positions,
            provenance,
            stats,
            flag: TrajectoryFlag::Ok,
        });
    }

    let span = t_final - t0;
    let n_out = settings.outputs - 1;
    let cap = |t: f64| settings.dt_max.min(source.max_step(t)).max(settings.dt_min);
    let mut h = settings.dt_initial.min(cap(t0));
    let mut t = t0;
    let mut x = x0;
    for j in 1..=n_out {
        let t_out = if j == n_out {
            t_final
        } else {
            t0 + span * j as f64 / n_out as f64
        };
        while t < t_out {
            let remaining = t_out - t;
            h = h.min(cap(t));
            let step = h.min(remaining);
            let landing = step == remaining;
            match stepper.attempt(x, t, step, true) {
                Attempt::Ok {
                    x: next,
                    err,
                    v0,
                    v1,
                } if err <= settings.tol && !velocity_jump(v0, v1, step, settings.tol) => {
                    x = next;
                    t = if landing { t_out } else { t + step };
                    stats.accepted += 1;
                    if err < settings.tol / 32.0 && !landing {
                        h = (2.0 * h).min(cap(t));
                    }
                }
                _ if step > settings.dt_min => {
                    stats.rejected += 1;
                    h = (0.5 * step).max(settings.dt_min);
                }
                _ => {
                    // floor reached: take the step regardless of the mask
                    if !(landing && step < settings.dt_min) {
                        stats.dt_min_hits += 1;
                    }
                    match stepper.attempt(x, t, step, false) {
                        Attempt::Ok { x: next, .. } => {
                            x = next;
                            t = if landing { t_out } else { t + step };
                        }
                        Attempt::Masked => return Err(Error::LeftGrid { t, position: x }),
                    }
                }
            }
            if !x[0].is_finite() || !x[1].is_finite() {
                return Err(Error::NonFinite {
                    step: stats.accepted,
                });
            }
            if !source.grid().contains(x) {
                return Err(Error::LeftGrid { t, position: x });
            }
        }
        times.push(t_out);
        positions.push(x);
    }
    let flag = if stats.dt_min_hits > MAX_DT_MIN_HITS {
        TrajectoryFlag::NearNodeUnreliable
    } else {
        TrajectoryFlag::Ok
    };
    Ok(Trajectory {
        times,
        positions,
        provenance,
        stats,
        flag,
    })
}

/// `|v1 - v0| > 0.5 |v|`, ignored when the jump cannot move the particle by more than `tol`.
fn velocity_jump(v0: Point, v1: Point, h: f64, tol: f64) -> bool {
    let dv = (v1[0] - v0[0]).hypot(v1[1] - v0[1]);
    let vref = v0[0].hypot(v0[1]).max(v1[0].hypot(v1[1]));
    dv > MAX_RELATIVE_DV * vref && dv * h > tol
}
