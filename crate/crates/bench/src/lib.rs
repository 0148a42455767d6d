//! Shared fixtures for the kernel benchmarks: one seeded path per family so
//! every run measures the same inputs.

use pathcalc_core::generate::{gen_brownian, gen_fbm, gen_weierstrass};
use pathcalc_core::{NestedPartitionSequence, RegulatedPath};

pub const SEED: u64 = 17;

pub fn brownian(n: usize) -> RegulatedPath {
    gen_brownian(1.0, n, SEED).unwrap()
}

pub fn fbm(n: usize, hurst: f64) -> RegulatedPath {
    gen_fbm(1.0, n, hurst, SEED).unwrap()
}

pub fn weierstrass(n: usize) -> RegulatedPath {
    gen_weierstrass(1.0, n, 0.5, 3.0).unwrap()
}

pub fn dyadic(levels: u32) -> NestedPartitionSequence {
    NestedPartitionSequence::dyadic(1.0, levels)
}
