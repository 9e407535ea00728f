//! Seeded random streams.
//!
//! Every consumer of randomness owns its own ChaCha stream derived from the experiment
//! seed and a fixed stream tag, so adding draws in one component never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod tag {
    pub const ENV_NOISE: u64 = 1;
    pub const REGIME: u64 = 2;
    pub const EXPLORE: u64 = 3;
    pub const GOALS: u64 = 4;
    pub const IMITATION: u64 = 5;
    pub const TEACHER: u64 = 6;
    pub const BENCHMARK: u64 = 7;
    pub const TEACHING_SET: u64 = 8;
    pub const REACHABILITY: u64 = 9;
}

/// Independent stream `tag` of `seed`.
pub fn stream(seed: u64, tag: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}
