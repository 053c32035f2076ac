//! Deterministic seed derivation.
//!
//! Every trial owns four independent streams (message point, shared protocol
//! randomness, channel randomness, dither). All of them derive from a single
//! master seed through splitmix64, so a run is reproducible from one `u64`
//! and the derivation rule below is simple enough to restate in any language:
//!
//! ```text
//! trial_seed(master, t) = splitmix64(master + t * 0x9E3779B97F4A7C15)
//! stream(seed, c)       = ChaCha8 seeded with splitmix64(seed + 1 + c)
//! ```

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream roles within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Message = 0,
    Shared = 1,
    Channel = 2,
    Dither = 3,
}

/// splitmix64 finalizer; the documented seed-mixing function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the master seed.
pub fn trial_seed(master: u64, trial_index: u64) -> u64 {
    splitmix64(master.wrapping_add(trial_index.wrapping_mul(0x9E3779B97F4A7C15)))
}

/// One of the four per-trial streams.
pub fn stream(trial_seed: u64, role: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(trial_seed.wrapping_add(1 + u64::from(role))))
}

/// Rng bundle for one protocol trial.
pub struct TrialStreams {
    pub message: ChaCha8Rng,
    pub shared: ChaCha8Rng,
    pub channel: ChaCha8Rng,
    pub dither: ChaCha8Rng,
}

impl TrialStreams {
    pub fn from_trial_seed(seed: u64) -> Self {
        Self {
            message: stream(seed, StreamRole::Message as u8),
            shared: stream(seed, StreamRole::Shared as u8),
            channel: stream(seed, StreamRole::Channel as u8),
            dither: stream(seed, StreamRole::Dither as u8),
        }
    }
}
