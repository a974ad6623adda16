//! Seed handling. Every random stream is derived from one user seed by
//! `seed ^ stream_id`, then expanded by ChaCha8.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Well-known stream ids used across the crate.
pub mod stream {
    pub const SAMPLING: u64 = 0x01;
    pub const EPR: u64 = 0x02;
    pub const CHSH: u64 = 0x03;
    pub const BASES: u64 = 0x04;
    pub const OPERATORS: u64 = 0x05;
    pub const INPUTS: u64 = 0x06;
}

pub fn derive_seed(seed: u64, stream_id: u64) -> u64 {
    seed ^ stream_id
}

pub fn rng_for(seed: u64, stream_id: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream_id))
}
