//! Seeded initial phases.
//!
//! The stream is the standard splitmix64 sequence started from `state = seed`;
//! each draw keeps the top 53 bits, `u = (x >> 11) * 2^-53`, and the phase is
//! `u * xi`, so phases are uniform in `[0, xi)`.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

pub fn uniform_phases(seed: u64, n: usize, xi: f64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..n).map(|_| (rng.next_u64() >> 11) as f64 * INV_2_53 * xi).collect()
}
