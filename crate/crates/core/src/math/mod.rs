pub mod fft;
pub mod linalg;
pub mod optim;
pub mod quad;
pub mod special;
pub mod stats;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Deterministic random stream `stream` derived from a user seed.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub fn sq(x: f64) -> f64 {
    x * x
}
