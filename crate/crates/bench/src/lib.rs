//! Fixed benchmark workloads, shared by the criterion benches and their tests.

use rentfair_core::gen::{random_economy, GenParams, Tightness};
use rentfair_core::{Economy, Family, Objective};

/// Economies of `n` agents with slope ladder size `k`, one per seed.
pub fn workload(n: usize, k: usize, seeds: u64, tightness: Tightness) -> Vec<Economy> {
    (0..seeds)
        .map(|seed| {
            random_economy(GenParams {
                n,
                k,
                seed,
                tightness,
            })
        })
        .collect()
}

pub fn full(family: Family, economy: &Economy) -> Objective {
    Objective::full(family, economy.n())
}
