//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived
//! from the run seed, so adding or reordering consumers never shifts the
//! values another one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Init,
    Negatives,
    Batches,
    Splits,
    Graph,
    Features,
    Sparsification,
}

pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    substream(seed, purpose, 0)
}

/// Stream `index` within a purpose (e.g. one per weight matrix).
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index);
    rng
}
