//! Reproducible per-replication random streams.
//!
//! Every replication gets its own ChaCha stream addressed by a path such as
//! `(seed, case, rule, replication)`. The key is derived from all but the last
//! path element and the last element selects the ChaCha stream id, so any
//! replication can be regenerated on its own, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `path` under `seed`. An empty path is stream 0 of the seed key.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let (prefix, stream) = match path.split_last() {
        Some((last, rest)) => (rest, *last),
        None => (&[][..], 0),
    };
    let mut state = seed;
    for &p in prefix {
        state = splitmix64(&mut state) ^ p;
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}
