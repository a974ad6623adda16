//! Time-indexed velocity fields consumed by the trajectory integrator.

use rayon::prelude::*;

use super::velocity::{velocity_field_with, VelocityField};
use crate::error::{Error, Result};
use crate::numerics::{propagate_free_with, Evolver, Grid, Point, Spectral, WaveFunction};

/// Outcome of sampling a source at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Velocity(Point),
    Masked,
}

/// A guidance field `v(x, t)` defined on `[t_start, t_end]`.
pub trait FieldSource: Sync {
    fn grid(&self) -> &Grid;
    fn t_start(&self) -> f64;
    fn t_end(&self) -> f64;
    /// Upper bound for an integrator step starting at `t` (e.g. the local snapshot spacing).
    fn max_step(&self, t: f64) -> f64;
    fn sample(&self, p: Point, t: f64, strict: bool) -> Sample;
}

/// Velocity of a stationary state: `|psi|` is constant in time and so is the field.
#[derive(Debug, Clone)]
pub struct StationarySource {
    field: VelocityField,
    t_end: f64,
}

impl StationarySource {
    /// `psi` is the eigenstate at t = 0; the global phase `exp(-iEt)` never
    /// enters the velocity, so it is not applied.
    pub fn new(psi: &WaveFunction, t_end: f64) -> Result<Self> {
        Ok(Self {
            field: super::velocity::velocity_field(psi)?,
            t_end,
        })
    }

    pub fn field(&self) -> &VelocityField {
        &self.field
    }
}

impl FieldSource for StationarySource {
    fn grid(&self) -> &Grid {
        self.field.grid()
    }
    fn t_start(&self) -> f64 {
        0.0
    }
    fn t_end(&self) -> f64 {
        self.t_end
    }
    fn max_step(&self, _t: f64) -> f64 {
        f64::INFINITY
    }
    fn sample(&self, p: Point, _t: f64, strict: bool) -> Sample {
        match self.field.interpolate(p, strict) {
            Some(v) => Sample::Velocity(v),
            None => Sample::Masked,
        }
    }
}

/// Velocity fields stored at increasing snapshot times, linearly interpolated in time.
#[derive(Debug, Clone)]
pub struct SnapshotSource {
    times: Vec<f64>,
    fields: Vec<VelocityField>,
}

impl SnapshotSource {
    pub fn from_fields(fields: Vec<VelocityField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidArgument(
                "snapshot source needs at least one field".into(),
            ));
        }
        let times: Vec<f64> = fields.iter().map(VelocityField::time).collect();
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "snapshot times must increase strictly".into(),
            ));
        }
        if fields.iter().any(|f| f.grid() != fields[0].grid()) {
            return Err(Error::InvalidArgument(
                "snapshots must share one grid".into(),
            ));
        }
        Ok(Self { times, fields })
    }

    /// Computes velocity fields for a sequence of states (in parallel).
    pub fn from_states(states: &[WaveFunction]) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidArgument("no states given".into()));
        };
        let spectral = Spectral::new(first.grid());
        let fields = states
            .par_iter()
            .map(|psi| velocity_field_with(&spectral, psi))
            .collect::<Result<Vec<_>>>()?;
        Self::from_fields(fields)
    }

    /// Exact free flight of `psi0` sampled at `times` (relative to `psi0.time()`).
    pub fn free_flight(psi0: &WaveFunction, times: &[f64]) -> Result<Self> {
        let spectral = Spectral::new(psi0.grid());
        let k2 = psi0.grid().k_squared();
        let fields = times
            .par_iter()
            .map(|&t| {
                let psi = propagate_free_with(&spectral, &k2, psi0, t)?;
                velocity_field_with(&spectral, &psi)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_fields(fields)
    }

    /// Split-step evolution of `psi0`, storing a field every `stride` steps,
    /// `snapshots` intervals in total. Returns the source and the final state.
    pub fn from_evolver(
        psi0: &WaveFunction,
        evolver: &Evolver,
        stride: usize,
        snapshots: usize,
    ) -> Result<(Self, WaveFunction)> {
        let mut states = Vec::with_capacity(snapshots + 1);
        let mut psi = psi0.clone();
        states.push(psi.clone());
        for _ in 0..snapshots {
            evolver.step_in_place(&mut psi, stride)?;
            states.push(psi.clone());
        }
        Ok((Self::from_states(&states)?, psi))
    }

    /// Appends another source that starts where this one ends (its first
    /// field replaces nothing; times must continue to increase).
    pub fn chain(mut self, next: SnapshotSource) -> Result<Self> {
        let mut fields = std::mem::take(&mut self.fields);
        let last = *self.times.last().unwrap();
        fields.extend(next.fields.into_iter().filter(|f| f.time() > last));
        Self::from_fields(fields)
    }

    fn bracket(&self, t: f64) -> (usize, usize) {
        let hi = self
            .times
            .partition_point(|&s| s <= t)
            .clamp(1, self.times.len() - 1);
        (hi - 1, hi)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[VelocityField] {
        &self.fields
    }
}

impl FieldSource for SnapshotSource {
    fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }
    fn t_start(&self) -> f64 {
        self.times[0]
    }
    fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }
    fn max_step(&self, t: f64) -> f64 {
        if self.times.len() < 2 {
            return f64::INFINITY;
        }
        let (lo, hi) = self.bracket(t);
        self.times[hi] - self.times[lo]
    }
    fn sample(&self, p: Point, t: f64, strict: bool) -> Sample {
        if self.fields.len() == 1 {
            return match self.fields[0].interpolate(p, strict) {
                Some(v) => Sample::Velocity(v),
                None => Sample::Masked,
            };
        }
        let (lo, hi) = self.bracket(t);
        let w = ((t - self.times[lo]) / (self.times[hi] - self.times[lo])).clamp(0.0, 1.0);
        let a = if w < 1.0 {
            self.fields[lo].interpolate(p, strict)
        } else {
            Some([0.0; 2])
        };
        let b = if w > 0.0 {
            self.fields[hi].interpolate(p, strict)
        } else {
            Some([0.0; 2])
        };
        match (a, b) {
            (Some(a), Some(b)) => {
                Sample::Velocity([(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]])
            }
            _ => Sample::Masked,
        }
    }
}
