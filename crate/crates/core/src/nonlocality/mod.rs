//! Maximally entangled states, the `O -> O~` correspondence, EPR sampling, CHSH
//! bounds and the composed nonlocality argument.

mod chsh;
mod epr;
mod schroedinger;
mod state;

pub use chsh::{
    chsh_quantum, correlation, enumerate_local_strategies, s_value, spin_projection, Angles, ChshReport, LocalBound,
    LocalStrategy, TERMS,
};
pub use epr::{
    agreement, collapse, joint_distribution, outcomes, records_csv, sample_epr, MeasurementRecord, Outcome,
    DEGENERACY_TOL,
};
pub use schroedinger::{
    embedded_mermin_family, schroedinger_theorem_demo, StepKind, StepRecord, StructuredReport, DEFAULT_TRIALS,
    LOCALITY_REFUTED,
};
pub use state::{correspond, inverse_correspond, CorrespondencePair, MaxEntangledState, Side, BASIS_TOL, PAIR_TOL};
