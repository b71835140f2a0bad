//! Seeded, splittable random streams.
//!
//! Every stochastic operation takes an explicit generator. Replica `k` of a
//! run seeded with `s` draws from ChaCha stream `k` of key `s`, so adding
//! replicas never perturbs the earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_stream(master_seed: u64, replica: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Derives an independent stream for a named sub-task of a replica
/// (e.g. the graph generator vs. the removal order).
pub fn substream(master_seed: u64, replica: u64, purpose: u64) -> SimRng {
    replica_stream(
        master_seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        replica,
    )
}
