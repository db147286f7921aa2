//! Seeded randomness for test functions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent standard-normal values, one per state.
pub fn gaussian_function(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Deterministic bounded function `F(state, a, b)` with values in `[-1, 1]`,
/// evaluated by hashing its arguments so it never needs to be stored.
#[derive(Debug, Clone, Copy)]
pub struct HashedFunction {
    seed: u64,
}

impl HashedFunction {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn eval(&self, state: usize, a: usize, b: usize) -> f64 {
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for v in [state as u64, a as u64, b as u64] {
            h = splitmix(h ^ v);
        }
        (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
