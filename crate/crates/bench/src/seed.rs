//! Deterministic seed derivation.
//!
//! A trial's seed depends only on the master seed, the sweep-point index and
//! the trial index, so results do not depend on how trials are scheduled.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(state: u64, word: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN).wrapping_add(mix64(word)))
}

pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    absorb(absorb(mix64(master), point as u64), trial as u64)
}

/// Independent stream inside one trial (matrix, signal, noise).
pub fn stream_seed(trial_seed: u64, stream: u64) -> u64 {
    absorb(trial_seed, stream ^ 0x5eed)
}
