use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::Chain;
use crate::error::{Error, Result};

/// Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    /// Number of batches used for the standard error.
    pub batches: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { paths: 1_000_000, seed: 2024, batches: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    /// Average number of jumps per path.
    pub mean_jumps: f64,
}

/// Cumulative jump distribution of each row, `q_ij / (−q_ii)` over `j ≠ i`.
struct JumpTable {
    exit: Vec<f64>,
    targets: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
}

impl JumpTable {
    fn new(chain: &Chain) -> Self {
        let g = chain.generator();
        let n = g.len();
        let mut exit = vec![0.0; n];
        let mut targets = vec![Vec::new(); n];
        let mut cumulative = vec![Vec::new(); n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let q = g.q(i, j);
                if j != i && q > 0.0 {
                    acc += q;
                    targets[i].push(j);
                    cumulative[i].push(acc);
                }
            }
            exit[i] = acc;
        }
        Self { exit, targets, cumulative }
    }

    fn next(&self, state: usize, u: f64) -> usize {
        let cum = &self.cumulative[state];
        let level = u * self.exit[state];
        let k = cum.partition_point(|&c| c <= level).min(cum.len() - 1);
        self.targets[state][k]
    }
}

/// Exact-in-law simulation of the continuously monitored Asian call:
/// exponential holding times, embedded jump chain, and `A_T` accumulated
/// piecewise exactly. Each path draws from its own ChaCha stream keyed by
/// `(seed, path index)`, so results are bit-identical for any thread count.
pub fn mc_continuous_price(
    chain: &Chain,
    r: f64,
    maturity: f64,
    strike: f64,
    start_state: usize,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.paths < 100 {
        return Err(Error::arg(format!("Monte Carlo needs at least 100 paths, got {}", cfg.paths)));
    }
    if cfg.batches < 2 || cfg.batches > cfg.paths {
        return Err(Error::arg("batches must be between 2 and the number of paths"));
    }
    if start_state >= chain.len() {
        return Err(Error::arg(format!("start state {start_state} outside the chain")));
    }
    if !(maturity > 0.0) {
        return Err(Error::arg("maturity must be positive"));
    }
    let table = JumpTable::new(chain);
    let x = chain.states();
    let target = maturity * strike;

    let path = |index: u64| -> (f64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let (mut state, mut time, mut area, mut jumps) = (start_state, 0.0, 0.0, 0u64);
        loop {
            let rate = table.exit[state];
            let hold = if rate > 0.0 {
                // 1 − U lies in (0, 1], so the logarithm is finite
                -(1.0 - rng.random::<f64>()).ln() / rate
            } else {
                f64::INFINITY
            };
            if time + hold >= maturity {
                area += x[state] * (maturity - time);
                break;
            }
            area += x[state] * hold;
            time += hold;
            state = table.next(state, rng.random::<f64>());
            jumps += 1;
        }
        ((area - target).max(0.0), jumps)
    };

    let per_batch = cfg.paths / cfg.batches;
    let extra = cfg.paths % cfg.batches;
    let batches: Vec<(f64, usize, u64)> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let start = b * per_batch + b.min(extra);
            let count = per_batch + usize::from(b < extra);
            let mut sum = 0.0;
            let mut jumps = 0;
            for i in start..start + count {
                let (payoff, j) = path(i as u64);
                sum += payoff;
                jumps += j;
            }
            (sum, count, jumps)
        })
        .collect();

    let scale = (-r * maturity).exp() / maturity;
    let total: f64 = batches.iter().map(|b| b.0).sum();
    let price = scale * total / cfg.paths as f64;
    let means: Vec<f64> = batches.iter().map(|&(s, c, _)| scale * s / c as f64).collect();
    let k = means.len() as f64;
    let avg = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (k - 1.0);
    let jumps: u64 = batches.iter().map(|b| b.2).sum();
    Ok(McEstimate { price, std_error: (var / k).sqrt(), mean_jumps: jumps as f64 / cfg.paths as f64 })
}
