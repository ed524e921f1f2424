//! Seeded randomness for randomized checks.
//!
//! The generator is ChaCha8. Configuration `c` under master seed `s` is keyed
//! by `splitmix64(s ^ splitmix64(c))`, and trial `i` reads stream `i` of that
//! key, so a trial's draws depend only on `(s, c, i)` and never on which
//! worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5EED_F1A9_DE45_0001;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_rng(seed: u64, config: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(config)));
    rng.set_stream(trial);
    rng
}
