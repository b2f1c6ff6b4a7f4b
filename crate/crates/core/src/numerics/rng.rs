use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampling routine. One explicit seed per call and
/// no global state, so identical seeds reproduce identical streams.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
