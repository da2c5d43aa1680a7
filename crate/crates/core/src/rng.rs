//! Counter-based seed streams.
//!
//! A stream is a ChaCha20 keystream: the key is expanded from the master
//! seed, and the 64-bit stream id packs the replication id with the role.
//! Draw `k` of stream `(seed, id, role)` is therefore a pure function of
//! those inputs, independent of scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Consumer of a stream. Distinct roles never share keystream blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Sampler,
    Coupler,
    Gaussian,
    Corrector,
    Auxiliary,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Sampler => 1,
            StreamRole::Coupler => 2,
            StreamRole::Gaussian => 3,
            StreamRole::Corrector => 4,
            StreamRole::Auxiliary => 5,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent reproducible stream for `(master_seed, replication_id, role)`.
///
/// Replication ids are limited to 56 bits; the low byte of the ChaCha
/// stream id carries the role.
pub fn seed_stream(master_seed: u64, replication_id: u64, role: StreamRole) -> StreamRng {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream((replication_id << 8) | role.tag());
    rng
}
