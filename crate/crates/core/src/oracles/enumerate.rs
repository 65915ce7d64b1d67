use rayon::prelude::*;

use crate::chain::Chain;
use crate::error::{Error, Result};

/// Largest number of paths the enumeration oracle accepts.
pub const MAX_PATHS: f64 = 1e7;

/// Exact discretely monitored Asian call price by summing over every state
/// path `X_0 = x_start, X_Δ, …, X_{nΔ}` weighted by its probability:
/// `e^{−rT} E[(B_n/(n+1) − K)⁺]`. The chain must cache `P(T/n)`.
pub fn enumerate_discrete_price(
    chain: &Chain,
    r: f64,
    maturity: f64,
    n: usize,
    strike: f64,
    start_state: usize,
) -> Result<f64> {
    let len = chain.len();
    if start_state >= len {
        return Err(Error::arg(format!("start state {start_state} outside a chain of {len} states")));
    }
    if (len as f64).powi(n as i32 + 1) > MAX_PATHS {
        return Err(Error::arg(format!("{len}^{} paths exceed the enumeration limit {MAX_PATHS:e}", n + 1)));
    }
    let x = chain.states();
    let discount = (-r * maturity).exp();
    let m = (n + 1) as f64;
    if n == 0 {
        return Ok(discount * (x[start_state] - strike).max(0.0));
    }
    let delta = maturity / n as f64;
    let p = match (chain.delta(), chain.p_delta()) {
        (Some(d), Some(p)) if (d - delta).abs() <= 1e-12 * delta => p,
        _ => return Err(Error::arg(format!("chain must cache P(Δ) for Δ = T/n = {delta}"))),
    };
    let target = m * strike;

    // Depth-first over the remaining steps. Each first-step subtree is summed
    // sequentially and the subtrees are combined in index order, so the
    // result does not depend on the thread count.
    fn walk(p: &crate::linalg::RMatrix, x: &[f64], state: usize, steps: usize, sum: f64, target: f64) -> f64 {
        if steps == 0 {
            return (sum - target).max(0.0);
        }
        let row = p.row(state);
        let mut acc = 0.0;
        for (j, &pj) in row.iter().enumerate() {
            if pj > 0.0 {
                acc += pj * walk(p, x, j, steps - 1, sum + x[j], target);
            }
        }
        acc
    }
    let first = p.row(start_state);
    let parts: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|j| {
            if first[j] > 0.0 {
                first[j] * walk(p, x, j, n - 1, x[start_state] + x[j], target)
            } else {
                0.0
            }
        })
        .collect();
    Ok(discount / m * parts.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Generator;

    fn chain(delta: f64) -> Chain {
        let g = Generator::from_rows(vec![0.8, 1.0, 1.3], &[vec![-1.0, 1.0, 0.0], vec![0.5, -1.0, 0.5], vec![0.0, 2.0, -2.0]])
            .unwrap();
        Chain::with_delta(g, delta).unwrap()
    }

    #[test]
    fn no_monitoring_dates_is_the_intrinsic_value() {
        let c = chain(0.5);
        let price = enumerate_discrete_price(&c, 0.05, 1.0, 0, 0.9, 1).unwrap();
        assert!((price - (-0.05f64).exp() * 0.1).abs() < 1e-15);
    }

    #[test]
    fn single_state_ignores_monitoring() {
        let c = Chain::with_delta(Generator::from_rows(vec![1.2], &[vec![0.0]]).unwrap(), 0.25).unwrap();
        for n in [1, 4] {
            let c = c.at_delta(1.0 / n as f64).unwrap();
            let price = enumerate_discrete_price(&c, 0.02, 1.0, n, 1.0, 0).unwrap();
            assert!((price - (-0.02f64).exp() * 0.2).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_strike_is_the_expected_average() {
        let c = chain(0.25);
        let price = enumerate_discrete_price(&c, 0.0, 1.0, 4, 0.0, 0).unwrap();
        let p = c.p_delta().unwrap();
        let mut dist = vec![1.0, 0.0, 0.0];
        let mut mean = 0.8;
        for _ in 0..4 {
            dist = (0..3).map(|j| (0..3).map(|i| dist[i] * p.row(i)[j]).sum()).collect();
            mean += dist.iter().zip(c.states()).map(|(a, b)| a * b).sum::<f64>();
        }
        assert!((price - mean / 5.0).abs() < 1e-13);
    }

    #[test]
    fn limits() {
        let c = chain(0.1);
        assert!(enumerate_discrete_price(&c, 0.0, 1.0, 10, 1.0, 0).is_ok());
        assert!(enumerate_discrete_price(&c, 0.0, 2.0, 20, 1.0, 0).is_err());
        assert!(enumerate_discrete_price(&c, 0.0, 1.0, 4, 1.0, 0).is_err());
        assert!(enumerate_discrete_price(&c, 0.0, 1.0, 10, 1.0, 5).is_err());
    }
}
