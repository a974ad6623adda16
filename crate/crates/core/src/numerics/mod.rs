//! Uniform grids, complex fields and split-step Schrödinger/Pauli evolution
//! in natural units (hbar = m = 1).

mod evolve;
mod grid;
pub mod io;
mod potential;
mod spectral;
mod wavefunction;

#[allow(unused_imports)]
pub(crate) use evolve::propagate_free_with;
pub use evolve::{energy, evolve, propagate_free, Evolver, MAX_KINETIC_PHASE, MAX_POTENTIAL_PHASE};
pub use grid::{Axis, Grid, Point, MIN_POINTS};
pub use potential::{Orientation, Potential, BOX_WALL_HEIGHT};
pub use spectral::Spectral;
pub use wavefunction::{make_wavefunction, Gradient, Initializer, WaveFunction, SUPPORT_SIGMAS};

/// Spectral gradient of `psi` (per axis, per component).
pub fn gradient(psi: &WaveFunction) -> Gradient {
    psi.gradient()
}
