//! Seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator for trial `index` under `seed`.
///
/// Each trial owns an independent ChaCha stream, so results do not depend on
/// the order in which trials are evaluated.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
