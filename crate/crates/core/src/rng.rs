//! Named random substreams derived from one top-level seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream names used across a run.
pub mod stream {
    pub const GENERATOR: &str = "generator";
    pub const TIE_BREAK: &str = "tie-break";
    pub const SMO: &str = "smo";
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the substream `name` of `seed`, optionally indexed (e.g. by iteration).
pub fn substream(seed: u64, name: &str, index: u64) -> u64 {
    // FNV-1a over the name, then mixed with the seed and index
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h).wrapping_add(index))
}

pub fn rng_for(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream(seed, name, index))
}

/// Generator for row `row` of a row-parallel computation.
pub(crate) fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct() {
        let a = substream(1, stream::SMO, 0);
        assert_ne!(a, substream(1, stream::TIE_BREAK, 0));
        assert_ne!(a, substream(2, stream::SMO, 0));
        assert_ne!(a, substream(1, stream::SMO, 1));
        assert_eq!(a, substream(1, stream::SMO, 0));
    }
}
