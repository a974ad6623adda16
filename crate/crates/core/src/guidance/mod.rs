//! Guidance-equation velocity fields and particle trajectories.

mod ensemble;
mod integrate;
pub mod io;
mod source;
mod velocity;

pub use ensemble::{
    evolve_ensemble, Ensemble, EnsembleOptions, EnsembleRun, MemberStatus, MAX_FAILURE_FRACTION,
};
pub use integrate::{
    integrate_trajectory, IntegratorSettings, Provenance, StepStats, Trajectory, TrajectoryFlag,
    DT_MIN, MAX_DT_MIN_HITS,
};
pub use source::{FieldSource, Sample, SnapshotSource, StationarySource};
pub use velocity::{velocity_field, VelocityField, NODE_FLOOR_FRACTION};
