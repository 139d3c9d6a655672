//! Deterministic random-stream identifiers.
//!
//! Every random draw in the simulator is taken from a generator seeded by a
//! [`StreamId`]. Child streams are derived by mixing a tag into the parent id,
//! so a trial's draws depend only on its position in the derivation tree and
//! never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId(u64);

impl StreamId {
    pub const fn new(seed: u64) -> Self {
        StreamId(seed)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Derives an independent child stream labelled by `tag`.
    pub fn child(self, tag: u64) -> StreamId {
        StreamId(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x6a09_e667_f3bc_c909))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
