//! Benchmark fixtures shared by the criterion targets.

use japdr_core::random::{random_system, RandomConfig, RandomSystem};
use japdr_core::{gen_counter, gen_counter_thresholds, Circuit, PropertySpec};

pub fn counter(bits: usize) -> (Circuit, Vec<PropertySpec>) {
    gen_counter(bits).expect("valid width")
}

/// Counter whose ten thresholds all hold but are not inductive alone.
pub fn threshold_family(bits: usize) -> (Circuit, Vec<PropertySpec>) {
    gen_counter_thresholds(bits, 10, false).expect("valid width")
}

pub fn random_suite(count: u64) -> Vec<RandomSystem> {
    let cfg = RandomConfig::default();
    (0..count).map(|s| random_system(s, &cfg)).collect()
}
