//! Seed derivation for multi-run commands.
//!
//! Run `k` (1-based) uses `child = splitmix64(master + k * GOLDEN)`. Its random
//! measure is drawn from a generator seeded with `child`, and its optimizer
//! initialization uses `splitmix64(child ^ INIT_STREAM)`. Both are pure
//! functions of `(master, k)`, so a run's output does not depend on how many
//! other runs are requested.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INIT_STREAM: u64 = 0xD1B5_4A32_D192_ED03;
const EVENT_STREAM: u64 = 0x8CB9_2BA7_2F3D_8DD7;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `k` (1-based).
pub fn child_seed(master: u64, k: usize) -> u64 {
    splitmix64(master.wrapping_add((k as u64).wrapping_mul(GOLDEN)))
}

/// Optimizer initialization seed derived from a run's child seed.
pub fn init_seed(child: u64) -> u64 {
    splitmix64(child ^ INIT_STREAM)
}

/// Seed for drawing centering-check events.
pub fn event_seed(master: u64) -> u64 {
    splitmix64(master ^ EVENT_STREAM)
}
