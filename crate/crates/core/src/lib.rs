//! Pilot-wave (de Broglie-Bohm) dynamics and finite-dimensional hidden-variable checks.
//!
//! The dynamical half evolves wave functions on 1D/2D grids, integrates the
//! guidance equation for particle trajectories, and verifies quantum
//! equilibrium statistically. The algebraic half works with small Hermitian
//! matrices: Kochen-Specker colorings, the Mermin square, maximally entangled
//! states and CHSH correlations.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod guidance;
pub mod hilbert;
pub mod nonlocality;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
