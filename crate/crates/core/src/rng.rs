//! One master seed, many reproducible substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SldRng = ChaCha8Rng;

/// Independent stream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> SldRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
