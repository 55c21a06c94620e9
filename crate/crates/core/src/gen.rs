//! Seeded random economies for tests and benchmarks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Economy, SlopeSet};
use crate::Rational;

/// How close budgets sit to the average rent `m / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tightness {
    /// Budgets well above every envy-free rent.
    Low,
    /// Budgets scattered around the average rent.
    Mid,
    /// Budgets below the average rent.
    High,
}

impl Tightness {
    pub const ALL: [Tightness; 3] = [Tightness::Low, Tightness::Mid, Tightness::High];

    pub fn name(self) -> &'static str {
        match self {
            Tightness::Low => "low",
            Tightness::Mid => "mid",
            Tightness::High => "high",
        }
    }

    /// Budget range as offsets from the average rent.
    fn offsets(self) -> (i64, i64) {
        match self {
            Tightness::Low => (100, 150),
            Tightness::Mid => (-50, 50),
            Tightness::High => (-100, -20),
        }
    }
}

impl fmt::Display for Tightness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tightness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tightness::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown budget tightness {s:?} (expected low, mid or high)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub tightness: Tightness,
}

/// `{0} ∪ {p - 1 : p among the first k - 1 primes}`: 0, 1, 2, 4, 6, 10, ...
pub fn slope_ladder(k: usize) -> SlopeSet {
    let mut rhos = vec![Rational::zero()];
    let mut candidate = 2i64;
    while rhos.len() < k {
        if (2..candidate)
            .take_while(|d| d * d <= candidate)
            .all(|d| candidate % d != 0)
        {
            rhos.push(Rational::from(candidate - 1));
        }
        candidate += 1;
    }
    SlopeSet::new(rhos).expect("ladder is valid")
}

/// Integer values in `[0, 100]`, total rent `n * U[20, 80]`, budgets drawn
/// around the average rent per `tightness` and clamped at zero, slope
/// indices uniform over the ladder of size `k`.
pub fn random_economy(params: GenParams) -> Economy {
    let GenParams {
        n,
        k,
        seed,
        tightness,
    } = params;
    assert!(n >= 1 && k >= 1, "need n >= 1 and k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Vec<Rational>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Rational::from(rng.random_range(0..=100i64)))
                .collect()
        })
        .collect();
    let average = rng.random_range(20..=80i64);
    let (lo, hi) = tightness.offsets();
    let budgets = (0..n)
        .map(|_| Rational::from((average + rng.random_range(lo..=hi)).max(0)))
        .collect();
    let slopes = (0..n).map(|_| rng.random_range(0..k)).collect();
    Economy::from_parts(
        values,
        budgets,
        slopes,
        slope_ladder(k),
        Rational::from(average * n as i64),
    )
    .expect("generated economy is valid")
}
