//! Quantum-equilibrium sampling and statistical checks of equivariance.

mod equivariance;
mod sampler;
pub mod stats;

pub use equivariance::{
    equivariance_check, marginal_cdf, transport_source, EquivarianceReport, TransportSettings,
    KS_FLOOR,
};
pub use sampler::{sample_born, BornSampler};
pub use stats::{ks_statistic, ks_threshold, Histogram, TabulatedCdf, HISTOGRAM_BINS};
