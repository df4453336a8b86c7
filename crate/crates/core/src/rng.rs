use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for item `index` of a seeded batch. Each index owns its own
/// ChaCha stream, so results do not depend on evaluation order.
pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
