//! Counter-based seeding: every random draw is addressed by
//! `(global seed, stream, index)` so results never depend on evaluation order.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream identifiers. Each consumer of randomness owns one.
pub mod stream {
    pub const DIRECTIONS: u64 = 1;
    pub const GROUP_ELEMENTS: u64 = 2;
    pub const ORACLE: u64 = 3;
    pub const INVARIANCE_POINTS: u64 = 4;
}

pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    bytes[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// A standard normal vector; callers normalize as needed.
pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}
