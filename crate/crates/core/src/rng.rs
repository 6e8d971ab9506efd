//! Seeded random streams.
//!
//! Every replication draws from its own ChaCha8 stream, keyed by the master
//! seed and a domain tag and selected by the replication index. A replication's
//! draws therefore never depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_220_419;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for a single seed, used by one-off simulations.
pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for replication `rep` under `(master, domain)`.
pub fn stream(master: u64, domain: u64, rep: u64) -> SimRng {
    let mut state = master ^ domain.rotate_left(32);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(rep);
    rng
}

/// Stable 64-bit tag for a textual domain name (FNV-1a).
pub fn domain_tag(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
