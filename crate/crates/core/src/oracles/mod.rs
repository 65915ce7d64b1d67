//! Independent checks of the transform pipeline: double transforms inverted
//! numerically, exhaustive path enumeration on tiny chains, and exact CTMC
//! Monte Carlo.

mod double;
mod enumerate;
mod mc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{Chain, Generator};
use crate::error::Result;

pub use double::{
    l_continuous, l_discrete, mu_invert, neumann_resolvent, z_coefficient, z_radius, DoubleTransformQuery,
};
pub use enumerate::{enumerate_discrete_price, MAX_PATHS};
pub use mc::{mc_continuous_price, McConfig, McEstimate};

/// A random conservative generator on `n` sorted states in `[0.5, 2]` with
/// off-diagonal rates uniform in `[0, max_rate)`. Deterministic in `seed`.
pub fn random_generator(n: usize, max_rate: f64, seed: u64) -> Result<Generator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    states.sort_by(f64::total_cmp);
    states.dedup();
    while states.len() < n {
        // duplicates are vanishingly rare; spread them apart deterministically
        let last = *states.last().unwrap();
        states.push(last + 0.01);
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(0.0..max_rate) }).collect();
            row[i] = -row.iter().sum::<f64>();
            row
        })
        .collect();
    Generator::from_rows(states, &rows)
}

/// [`random_generator`] wrapped as a chain with `P(delta)` cached.
pub fn random_chain(n: usize, max_rate: f64, delta: f64, seed: u64) -> Result<Chain> {
    Chain::with_delta(random_generator(n, max_rate, seed)?, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_generator;

    #[test]
    fn random_generators_are_valid_and_deterministic() {
        for seed in 0..20 {
            let g = random_generator(6, 2.0, seed).unwrap();
            assert!(validate_generator(&g).is_empty());
            assert_eq!(g.rates(), random_generator(6, 2.0, seed).unwrap().rates());
        }
    }
}
