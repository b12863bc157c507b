//! Seeded random substreams.
//!
//! Every stochastic routine in the crate draws from `substream(seed, i)` for
//! the `i`-th independent unit of work (usually a security). ChaCha is a
//! counter-based generator with a 64-bit stream selector, so substream `i`
//! is fixed by `(seed, i)` alone and does not depend on how many other
//! substreams exist or which thread consumes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SubstreamRng = ChaCha8Rng;

pub fn substream(seed: u64, stream: u64) -> SubstreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an unrelated master seed for a labelled sub-experiment.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x6a09_e667_f3bc_c909)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
