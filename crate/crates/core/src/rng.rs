//! Keyed random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by the
//! user seed plus a small key (purpose tag and indices such as trial, look and
//! sample). Streams are independent of evaluation order, so parallel and
//! serial runs produce bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep unrelated consumers of the same seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    TxPhase = 1,
    RxPhase = 2,
    ReceiverNoise = 3,
    SwitchedNoise = 4,
    Test = 0xfff,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Returns the generator for `(seed, tag, key)`.
pub fn substream(seed: u64, tag: StreamTag, key: &[u64]) -> ChaCha8Rng {
    let mut seed_bytes = [0u8; 32];
    let mut h = splitmix64(seed ^ splitmix64(tag as u64));
    for chunk in seed_bytes.chunks_mut(8) {
        chunk.copy_from_slice(&h.to_le_bytes());
        h = splitmix64(h);
    }
    let mut stream = splitmix64(tag as u64);
    for &k in key {
        stream = splitmix64(stream ^ k);
    }
    let mut rng = ChaCha8Rng::from_seed(seed_bytes);
    rng.set_stream(stream);
    rng
}
