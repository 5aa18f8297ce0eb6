//! Counter-based random streams.
//!
//! Every variate lives at a fixed coordinate `(seed, domain, stream, lane,
//! position)`:
//!
//! * the ChaCha8 key is derived from `(seed, domain)` by SplitMix64;
//! * `stream` selects the ChaCha stream (the path id);
//! * `lane` (the Wiener component) selects a disjoint block of `2^52` words
//!   inside that stream;
//! * within a lane, variates are drawn sequentially, so the `n`-th variate
//!   of a lane depends only on the coordinates above.
//!
//! Nothing depends on which thread asks for which path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates unrelated consumers of the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Direct draws of ζ matrices.
    Zeta = 0x5a45_5441,
    /// Brownian increments of oracle paths.
    Path = 0x5041_5448,
}

const LANE_SHIFT: u32 = 52;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, domain: Domain) -> [u8; 32] {
    let mut state = seed ^ (domain as u64).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// A generator positioned at the start of `(stream, lane)`.
pub fn substream(seed: u64, domain: Domain, stream: u64, lane: u64) -> ChaCha8Rng {
    assert!(lane < (1 << 16), "lane {lane} out of range");
    let mut rng = ChaCha8Rng::from_seed(derive_key(seed, domain));
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(lane) << LANE_SHIFT);
    rng
}
