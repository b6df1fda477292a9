//! Deterministic random stream derivation.
//!
//! Every random draw in an experiment comes from a ChaCha stream
//! addressed by (master seed, trial index, stage label). Streams are
//! independent of execution order, so trials can run in parallel and
//! still reproduce bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// FNV-1a 64-bit hash.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// ChaCha stream for one (trial, stage) pair under a master seed.
///
/// The master seed expands to the cipher key; the stage label and trial
/// index select the stream id. Distinct labels give independent streams.
pub fn stream(master_seed: u64, trial: u64, label: &str) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut sm = master_seed;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut sm).to_le_bytes());
    }
    let mut tag = Vec::with_capacity(label.len() + 8);
    tag.extend_from_slice(label.as_bytes());
    tag.extend_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(fnv1a64(&tag));
    rng
}
