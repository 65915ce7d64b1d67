//! Euler-algorithm numerical Laplace inversion.
//!
//! For `ĝ(θ) = ∫_0^∞ e^{−θk} f(k) dk` the trapezoidal rule on the Bromwich
//! contour `Re θ = A/(2k)` gives the alternating partial sums
//!
//! ```text
//! s_j = e^{A/2}/(2k) Re ĝ(A/(2k)) + e^{A/2}/k Σ_{l=1}^{j} (−1)^l Re ĝ((A + 2πil)/(2k))
//! ```
//!
//! whose binomial average `E(n, m) = Σ_{j=0}^{m} C(m, j) 2^{−m} s_{n+j}`
//! estimates `f(k)`. The aliasing error is roughly `e^{−A} f(3k)`.
//!
//! Near a kink of `f` the truncation error decays only like `n^{−3/2}`, which
//! matters for chains with few states, where the payoff is piecewise linear in
//! the strike. The estimate is therefore refined by doubling `n` until two
//! consecutive doublings each change it by less than `refine_tol`, up to
//! `max_series_terms`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Parameters of the Euler algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    /// Contour abscissa parameter `A`; the aliasing error is about `e^{−A}`.
    pub a_param: f64,
    /// Index `n` of the first partial sum entering the average.
    pub series_terms: usize,
    /// Order `m` of the binomial average.
    pub euler_terms: usize,
    /// Express strikes and states in units of the spot before inverting.
    pub normalize: bool,
    /// Error proxy above which results are flagged, relative to `max(1, |f(k)|)`.
    pub warn_tol: f64,
    /// Upper limit for `n` when refining; equal to `series_terms` disables it.
    pub max_series_terms: usize,
    /// Relative agreement of successive estimates that ends the refinement.
    pub refine_tol: f64,
}

/// Default contour parameter. With `A = 18.4` the aliasing term alone is
/// `3e^{−18.4} ≈ 3e-8` for `f(k) = k` at `k = 1`, so a larger value is used;
/// the longer binomial average keeps the truncation error below the aliasing.
pub const DEFAULT_A: f64 = 23.0;

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            a_param: DEFAULT_A,
            series_terms: 15,
            euler_terms: 15,
            normalize: true,
            warn_tol: 1e-6,
            max_series_terms: 4096,
            refine_tol: 1e-6,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_param > 0.0 && self.a_param.is_finite()) {
            return Err(Error::arg(format!("a_param must be positive, got {}", self.a_param)));
        }
        if self.series_terms < 1 || self.euler_terms < 1 {
            return Err(Error::arg("series_terms and euler_terms must be at least 1"));
        }
        if self.max_series_terms < self.series_terms {
            return Err(Error::arg("max_series_terms must be at least series_terms"));
        }
        if self.max_series_terms + self.euler_terms > 100_000 {
            return Err(Error::arg("max_series_terms + euler_terms is unreasonably large"));
        }
        if !(self.warn_tol > 0.0) || !(self.refine_tol > 0.0) {
            return Err(Error::arg("warn_tol and refine_tol must be positive"));
        }
        Ok(())
    }

    /// Number of transform evaluations for an unrefined inversion.
    pub fn evaluations(&self) -> usize {
        self.series_terms + self.euler_terms + 1
    }

    /// The transform points of an unrefined inversion at `k`.
    pub fn nodes(&self, k: f64) -> Vec<C64> {
        self.node_range(k, 0, self.evaluations())
    }

    fn node_range(&self, k: f64, from: usize, to: usize) -> Vec<C64> {
        (from..to).map(|l| C64::new(self.a_param, 2.0 * std::f64::consts::PI * l as f64) / (2.0 * k)).collect()
    }
}

/// Inverted value with its error proxy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inverted {
    pub value: f64,
    /// `|E(n, m) − E(n/2, m)|` after refinement, else `|E(n, m) − E(n − 1, m)|`.
    pub error: f64,
    /// Set when the error proxy exceeds the configured tolerance.
    pub warning: bool,
    /// Final `n`.
    pub series_terms: usize,
}

/// Partial sums `s_0, s_1, …` of the alternating series.
fn partial_sums(re: &[f64], k: f64, a: f64) -> Vec<f64> {
    let scale = (a / 2.0).exp() / k;
    let mut s = 0.5 * scale * re[0];
    let mut partial = Vec::with_capacity(re.len());
    partial.push(s);
    for (l, &v) in re.iter().enumerate().skip(1) {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        s += scale * sign * v;
        partial.push(s);
    }
    partial
}

fn euler_average(partial: &[f64], weights: &[f64], start: usize) -> f64 {
    weights.iter().enumerate().map(|(j, w)| w * partial[start + j]).sum()
}

/// Combine real parts `Re ĝ(θ_l)` at the points of [`InversionConfig::nodes`]
/// into the Euler estimate of `f(k)`, without refinement.
pub fn euler_estimate(re: &[f64], k: f64, cfg: &InversionConfig) -> Inverted {
    assert_eq!(re.len(), cfg.evaluations(), "one transform value per node");
    let n = cfg.series_terms;
    let partial = partial_sums(re, k, cfg.a_param);
    let weights = binomial_weights(cfg.euler_terms);
    let value = euler_average(&partial, &weights, n);
    let error = (value - euler_average(&partial, &weights, n - 1)).abs();
    Inverted { value, error, warning: !(error <= cfg.warn_tol * value.abs().max(1.0)), series_terms: n }
}

/// Refined inversion of several components that share transform points.
/// `eval` maps a batch of points to one row of component real parts per point.
fn invert_refined<F>(eval: F, k: f64, cfg: &InversionConfig) -> Result<Vec<Inverted>>
where
    F: Fn(&[C64]) -> Result<Vec<Vec<f64>>>,
{
    check_point(k, cfg)?;
    let m = cfg.euler_terms;
    let mut rows = eval(&cfg.nodes(k))?;
    let components = rows[0].len();
    if rows.iter().any(|r| r.len() != components) {
        return Err(Error::arg("transform returned vectors of different lengths"));
    }
    let column = |rows: &[Vec<f64>], i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let mut results: Vec<Inverted> = (0..components).map(|i| euler_estimate(&column(&rows, i), k, cfg)).collect();
    let weights = binomial_weights(m);
    let mut n = cfg.series_terms;
    // successive doublings can agree by accident near a kink, so two
    // agreements in a row are required
    let mut agreed = 0;
    while 2 * n <= cfg.max_series_terms && agreed < 2 {
        let next = 2 * n;
        let more = eval(&cfg.node_range(k, n + m + 1, next + m + 1))?;
        if more.iter().any(|r| r.len() != components) {
            return Err(Error::arg("transform returned vectors of different lengths"));
        }
        rows.extend(more);
        let mut converged = true;
        for (i, res) in results.iter_mut().enumerate() {
            let partial = partial_sums(&column(&rows, i), k, cfg.a_param);
            let value = euler_average(&partial, &weights, next);
            let error = (value - res.value).abs();
            let scale = value.abs().max(1.0);
            converged &= error <= cfg.refine_tol * scale;
            *res = Inverted { value, error, warning: !(error <= cfg.warn_tol * scale), series_terms: next };
        }
        agreed = if converged { agreed + 1 } else { 0 };
        n = next;
    }
    Ok(results)
}

fn finite(theta: C64, v: C64) -> Result<f64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v.re)
    } else {
        Err(Error::numeric(format!("transform is not finite at θ = {theta}")))
    }
}

/// `C(m, j) 2^{−m}` for `j = 0..=m`.
fn binomial_weights(m: usize) -> Vec<f64> {
    let mut w = vec![1.0f64; m + 1];
    for j in 1..=m {
        w[j] = w[j - 1] * (m + 1 - j) as f64 / j as f64;
    }
    let norm = 0.5f64.powi(m as i32);
    w.iter().map(|c| c * norm).collect()
}

fn check_point(k: f64, cfg: &InversionConfig) -> Result<()> {
    cfg.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("inversion point must be positive, got {k}")));
    }
    Ok(())
}

/// Invert a scalar transform at `k > 0`.
pub fn invert_laplace<F>(g: F, k: f64, cfg: &InversionConfig) -> Result<Inverted>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    let eval = |nodes: &[C64]| nodes.par_iter().map(|&t| Ok(vec![finite(t, g(t)?)?])).collect::<Result<Vec<_>>>();
    Ok(invert_refined(eval, k, cfg)?.remove(0))
}

/// Invert every component of a vector-valued transform, sharing the
/// transform evaluations across components.
pub fn invert_vector_all<F>(g: F, k: f64, cfg: &InversionConfig) -> Result<Vec<Inverted>>
where
    F: Fn(C64) -> Result<CVector> + Sync,
{
    let eval = |nodes: &[C64]| {
        nodes
            .par_iter()
            .map(|&t| g(t)?.as_slice().iter().map(|&z| finite(t, z)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()
    };
    invert_refined(eval, k, cfg)
}

/// Invert the component `state_index` of a vector-valued transform.
pub fn invert_vector<F>(g: F, k: f64, cfg: &InversionConfig, state_index: usize) -> Result<Inverted>
where
    F: Fn(C64) -> Result<CVector> + Sync,
{
    let eval = |nodes: &[C64]| {
        nodes
            .par_iter()
            .map(|&t| {
                let v = g(t)?;
                let z = v.as_slice().get(state_index).copied().ok_or_else(|| {
                    Error::arg(format!("state index {state_index} out of range for length {}", v.len()))
                })?;
                Ok(vec![finite(t, z)?])
            })
            .collect::<Result<Vec<_>>>()
    };
    Ok(invert_refined(eval, k, cfg)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> InversionConfig {
        InversionConfig::default()
    }

    #[test]
    fn linear_function() {
        let r = invert_laplace(|t| Ok(1.0 / (t * t)), 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
        assert!(!r.warning);
    }

    #[test]
    fn saturating_exponential() {
        let r = invert_laplace(|t| Ok(1.0 / (t * (t + 1.0))), 2.0, &cfg()).unwrap();
        assert!((r.value - (1.0 - (-2f64).exp())).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn call_payoff_in_the_strike() {
        // ∫ e^{−θk}(c − k)⁺ dk = c/θ − (1 − e^{−θc})/θ²
        let c = 1.0;
        let g = |t: C64| Ok(c / t - (1.0 - (-t * c).exp()) / (t * t));
        for k in [0.1, 0.25, 0.5] {
            let r = invert_laplace(g, k, &cfg()).unwrap();
            assert!((r.value - (c - k).max(0.0)).abs() < 1e-8, "k={k}: {r:?}");
        }
        // the kink at k = c is resolved only slowly without refinement
        let fixed = InversionConfig { max_series_terms: 15, ..cfg() };
        let near = invert_laplace(g, 0.99, &fixed).unwrap();
        assert!((near.value - 0.01).abs() > 1e-6 && near.warning);
        let refined = invert_laplace(g, 0.99, &cfg()).unwrap();
        assert!((refined.value - 0.01).abs() < 1e-6, "{refined:?}");
        assert!(refined.series_terms > 15);
    }

    #[test]
    fn smooth_transforms_stop_after_two_doublings() {
        let r = invert_laplace(|t| Ok(1.0 / (t * (t + 1.0))), 2.0, &cfg()).unwrap();
        assert_eq!(r.series_terms, 60);
    }

    #[test]
    fn vector_components() {
        let g = |t: C64| CVector::new(vec![1.0 / (t * t), 1.0 / (t * t), 1.0 / (t * (t + 1.0))]);
        let all = invert_vector_all(g, 2.0, &cfg()).unwrap();
        assert_eq!(all[0].value, all[1].value);
        let single = invert_vector(g, 2.0, &cfg(), 2).unwrap();
        assert_eq!(single.value, all[2].value);
        assert!(invert_vector(g, 2.0, &cfg(), 3).is_err());
        let scalar = invert_laplace(|t| Ok(1.0 / (t * t)), 2.0, &cfg()).unwrap();
        assert_eq!(scalar.value, all[0].value);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(invert_laplace(|t| Ok(1.0 / t), 0.0, &cfg()), Err(Error::Domain(_))));
        let bad = InversionConfig { series_terms: 0, ..cfg() };
        assert!(invert_laplace(|t| Ok(1.0 / t), 1.0, &bad).is_err());
        assert!(matches!(invert_laplace(|_| Ok(C64::new(f64::NAN, 0.0)), 1.0, &cfg()), Err(Error::Numeric(_))));
    }

    #[test]
    fn weights_sum_to_one() {
        for m in [1, 5, 11] {
            assert!((binomial_weights(m).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
