//! Single Laplace transforms in the strike of the Asian payoff under a CTMC.
//!
//! For `Re(θ) > 0`:
//!
//! ```text
//! g_d(n, θ) = θ⁻² (e^{-θD} P(Δ))ⁿ e^{-θD} 1 − θ⁻² 1 + x θ⁻¹ Σ_{j=0}^{n} e^{j rΔ}
//! g_c(t, θ) = θ⁻² e^{(G − θD) t} 1 − θ⁻² 1 + x θ⁻¹ (e^{rt} − 1) / r
//! ```
//!
//! `g_d` is the transform of `k ↦ E[(B_n − k)⁺]` with `B_n = Σ_{i≤n} X_{iΔ}`
//! (undiscounted, without the `1/(n+1)` scaling), and `g_c` that of
//! `k ↦ E[(A_t − k)⁺]` with `A_t = ∫_0^t X_u du`. Both are vectors over the
//! starting state.

use crate::chain::{Chain, DiagD, Generator};
use crate::error::{Error, Result};
use crate::linalg::{
    expm_action_cost, expm_action_with, expm_apply, expm_apply_cost, mat_mul, mat_vec, ActionOptions, CMatrix,
    CVector, LinearOperator, C64,
};

/// How the average is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Monitoring {
    /// `n + 1` observations at `0, Δ, …, nΔ`.
    Discrete { n: usize, delta: f64 },
    /// Continuous average over `[0, t]`.
    Continuous { t: f64 },
}

/// A transform point together with its monitoring schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformQuery {
    pub theta: C64,
    pub monitoring: Monitoring,
}

impl TransformQuery {
    pub fn discrete(theta: C64, n: usize, delta: f64) -> Result<Self> {
        let q = Self { theta, monitoring: Monitoring::Discrete { n, delta } };
        q.validate()?;
        Ok(q)
    }

    pub fn continuous(theta: C64, t: f64) -> Result<Self> {
        let q = Self { theta, monitoring: Monitoring::Continuous { t } };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.re > 0.0) || !self.theta.im.is_finite() || !self.theta.re.is_finite() {
            return Err(Error::domain(format!("transform needs Re(θ) > 0, got θ = {}", self.theta)));
        }
        match self.monitoring {
            Monitoring::Discrete { delta, .. } if !(delta > 0.0 && delta.is_finite()) => {
                Err(Error::arg(format!("monitoring interval must be positive, got {delta}")))
            }
            Monitoring::Continuous { t } if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::arg(format!("horizon must be non-negative, got {t}")))
            }
            _ => Ok(()),
        }
    }
}

/// Evaluation path actually taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Materialized matrix power, `O(N³ n)`.
    Forward,
    /// Repeated matrix–vector products from the right, `O(N² n)`.
    Backward,
    /// Truncated-Taylor action of `e^{(G − θD)t}` on `1`.
    ExpmAction,
    /// Padé exponential of the scaled matrix applied to `1`.
    FullExpm,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Forward => "forward",
            Strategy::Backward => "backward",
            Strategy::ExpmAction => "expm-action",
            Strategy::FullExpm => "full-expm",
        })
    }
}

/// Choice of method for `e^{(G − θD)t} 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuousStrategy {
    /// Whichever of the two has the lower estimated cost.
    #[default]
    Auto,
    ExpmAction,
    FullExpm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformResult {
    pub values: CVector,
    pub strategy: Strategy,
}

/// `Σ_{j=0}^{n} e^{j rΔ} = (1 − e^{(n+1)rΔ}) / (1 − e^{rΔ})`, with the
/// limit `n + 1` near `rΔ = 0`.
pub fn discrete_rate_factor(r: f64, delta: f64, n: usize) -> f64 {
    let a = r * delta;
    let m = (n + 1) as f64;
    if a.abs() < 1e-8 {
        m * (1.0 + 0.5 * n as f64 * a)
    } else {
        (m * a).exp_m1() / a.exp_m1()
    }
}

/// `(e^{rt} − 1) / r`, with the limit `t` near `r t = 0`.
pub fn continuous_rate_factor(r: f64, t: f64) -> f64 {
    let a = r * t;
    if a.abs() < 1e-8 {
        t * (1.0 + 0.5 * a)
    } else {
        a.exp_m1() / r
    }
}

fn check_delta(chain: &Chain, delta: f64) -> Result<()> {
    match chain.delta() {
        Some(d) if (d - delta).abs() <= 1e-12 * d.max(delta) => Ok(()),
        Some(d) => Err(Error::arg(format!("chain caches P(Δ) for Δ = {d}, query asks for Δ = {delta}"))),
        None => Err(Error::arg("chain has no cached transition matrix; build it with a monitoring interval")),
    }
}

/// `θ⁻² (w − 1) + x θ⁻¹ c` assembled entrywise.
fn assemble(w: impl Iterator<Item = C64>, states: &[f64], theta: C64, factor: f64) -> Result<CVector> {
    let inv = theta.inv();
    let inv2 = inv * inv;
    let out: Vec<C64> = w.zip(states).map(|(w, &x)| (w - 1.0) * inv2 + inv * (x * factor)).collect();
    CVector::new(out).map_err(|_| Error::numeric(format!("transform is not finite at θ = {theta}")))
}

fn discrete_parts(chain: &Chain, q: &TransformQuery) -> Result<(usize, f64)> {
    q.validate()?;
    match q.monitoring {
        Monitoring::Discrete { n, delta } => {
            check_delta(chain, delta)?;
            Ok((n, delta))
        }
        Monitoring::Continuous { .. } => Err(Error::arg("discrete transform called with a continuous query")),
    }
}

/// Discrete transform by the backward recursion `v ← e^{-θD}(P(Δ) v)`
/// started from `v = e^{-θD} 1`.
pub fn g_discrete(chain: &Chain, r: f64, q: &TransformQuery) -> Result<TransformResult> {
    let (n, delta) = discrete_parts(chain, q)?;
    let p = chain.p_delta().expect("checked above");
    let ed = DiagD::new(chain.grid()).exp_neg(q.theta);
    let len = ed.len();
    let mut re: Vec<f64> = ed.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = ed.iter().map(|z| z.im).collect();
    let mut pre = vec![0.0; len];
    let mut pim = vec![0.0; len];
    for _ in 0..n {
        p.mul_split(&re, &im, &mut pre, &mut pim);
        for i in 0..len {
            let w = ed[i] * C64::new(pre[i], pim[i]);
            re[i] = w.re;
            im[i] = w.im;
        }
    }
    let w = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b));
    let values = assemble(w, chain.states(), q.theta, discrete_rate_factor(r, delta, n))?;
    Ok(TransformResult { values, strategy: Strategy::Backward })
}

/// Discrete transform through the explicit power `(e^{-θD} P(Δ))ⁿ`.
/// Reference implementation for testing the backward recursion.
pub fn g_discrete_forward(chain: &Chain, r: f64, q: &TransformQuery) -> Result<TransformResult> {
    let (n, delta) = discrete_parts(chain, q)?;
    let p = chain.p_delta().expect("checked above");
    let ed = DiagD::new(chain.grid()).exp_neg(q.theta);
    let len = ed.len();
    let m = CMatrix::from_fn(len, len, |i, j| ed[i] * p.row(i)[j])?;
    let mut power = CMatrix::identity(len);
    for _ in 0..n {
        power = mat_mul(&power, &m)?;
    }
    let w = mat_vec(&power, &CVector::new(ed)?)?;
    let values = assemble(w.into_vec().into_iter(), chain.states(), q.theta, discrete_rate_factor(r, delta, n))?;
    Ok(TransformResult { values, strategy: Strategy::Forward })
}

/// `G − θD` as an operator that reuses the real generator storage.
pub struct ShiftedGenerator<'a> {
    generator: &'a Generator,
    theta: C64,
}

impl<'a> ShiftedGenerator<'a> {
    pub fn new(generator: &'a Generator, theta: C64) -> Self {
        Self { generator, theta }
    }
}

impl LinearOperator for ShiftedGenerator<'_> {
    fn dim(&self) -> usize {
        self.generator.len()
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let n = v.len();
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let (mut ore, mut oim) = (vec![0.0; n], vec![0.0; n]);
        self.generator.rates().mul_split(&re, &im, &mut ore, &mut oim);
        let x = self.generator.grid().states();
        for i in 0..n {
            out[i] = C64::new(ore[i], oim[i]) - self.theta * x[i] * v[i];
        }
    }

    fn shifted_norm_one(&self, shift: C64) -> f64 {
        let n = self.dim();
        let x = self.generator.grid().states();
        let rates = self.generator.rates();
        let mut cols = vec![0.0; n];
        for i in 0..n {
            for (j, (&q, c)) in rates.row(i).iter().zip(cols.iter_mut()).enumerate() {
                *c += if i == j { (q - self.theta * x[i] - shift).norm() } else { q.abs() };
            }
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    fn trace(&self) -> C64 {
        let x = self.generator.grid().states();
        (0..self.dim()).map(|i| self.generator.q(i, i) - self.theta * x[i]).sum()
    }
}

/// Continuous transform with the automatically chosen exponential method.
pub fn g_continuous(chain: &Chain, r: f64, q: &TransformQuery) -> Result<TransformResult> {
    g_continuous_with(chain, r, q, ContinuousStrategy::Auto)
}

pub fn g_continuous_with(
    chain: &Chain,
    r: f64,
    q: &TransformQuery,
    strategy: ContinuousStrategy,
) -> Result<TransformResult> {
    q.validate()?;
    let t = match q.monitoring {
        Monitoring::Continuous { t } => t,
        Monitoring::Discrete { .. } => return Err(Error::arg("continuous transform called with a discrete query")),
    };
    let n = chain.len();
    let op = ShiftedGenerator::new(chain.generator(), q.theta);
    let ones = CVector::ones(n);
    let chosen = match strategy {
        ContinuousStrategy::ExpmAction => Strategy::ExpmAction,
        ContinuousStrategy::FullExpm => Strategy::FullExpm,
        ContinuousStrategy::Auto => {
            let mu = op.trace() / n as f64;
            let taylor = expm_action_cost(op.shifted_norm_one(mu) * t);
            let pade = expm_apply_cost(op.shifted_norm_one(C64::new(0.0, 0.0)) * t, n);
            if pade < taylor {
                Strategy::FullExpm
            } else {
                Strategy::ExpmAction
            }
        }
    };
    let w = if t == 0.0 {
        ones
    } else if chosen == Strategy::FullExpm {
        expm_apply(&chain.generator().shifted(q.theta), t, &ones)?
    } else {
        expm_action_with(&op, t, &ones, ActionOptions::default())?
    };
    let values = assemble(w.into_vec().into_iter(), chain.states(), q.theta, continuous_rate_factor(r, t))?;
    Ok(TransformResult { values, strategy: chosen })
}

/// Evaluate the transform matching the query's monitoring.
pub fn g_transform(chain: &Chain, r: f64, q: &TransformQuery, strategy: ContinuousStrategy) -> Result<TransformResult> {
    match q.monitoring {
        Monitoring::Discrete { .. } => g_discrete(chain, r, q),
        Monitoring::Continuous { .. } => g_continuous_with(chain, r, q, strategy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_state(x: f64) -> Chain {
        Chain::with_delta(Generator::from_rows(vec![x], &[vec![0.0]]).unwrap(), 0.1).unwrap()
    }

    fn four_state() -> Chain {
        let g = Generator::from_rows(
            vec![0.5, 0.9, 1.2, 2.0],
            &[
                vec![-1.0, 0.7, 0.2, 0.1],
                vec![0.4, -1.5, 0.8, 0.3],
                vec![0.1, 0.6, -1.2, 0.5],
                vec![0.2, 0.2, 1.6, -2.0],
            ],
        )
        .unwrap();
        Chain::with_delta(g, 0.25).unwrap()
    }

    #[test]
    fn single_state_discrete_closed_form() {
        let x = 1.3;
        let c = single_state(x);
        let theta = C64::new(0.7, 0.4);
        for n in [0, 1, 5] {
            let q = TransformQuery::discrete(theta, n, 0.1).unwrap();
            let g = g_discrete(&c, 0.0, &q).unwrap().values[0];
            let m = (n + 1) as f64;
            let expected = (-theta * m * x).exp() / (theta * theta) - 1.0 / (theta * theta) + m * x / theta;
            assert!((g - expected).norm() < 1e-13, "n={n}: {g} vs {expected}");
        }
    }

    #[test]
    fn n_zero_is_the_one_observation_transform() {
        let c = four_state();
        let theta = C64::new(1.5, -2.0);
        let g = g_discrete(&c, 0.03, &TransformQuery::discrete(theta, 0, 0.25).unwrap()).unwrap();
        for (i, &x) in c.states().iter().enumerate() {
            let expected = ((-theta * x).exp() - 1.0) / (theta * theta) + x / theta;
            assert!((g.values[i] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn backward_matches_forward() {
        let c = four_state();
        for (k, theta) in [C64::new(2.0, 1.0), C64::new(0.3, 7.0), C64::new(5.0, -3.0)].into_iter().enumerate() {
            let q = TransformQuery::discrete(theta, 3 + 4 * k, 0.25).unwrap();
            let b = g_discrete(&c, 0.05, &q).unwrap();
            let f = g_discrete_forward(&c, 0.05, &q).unwrap();
            assert_eq!(b.strategy, Strategy::Backward);
            assert!(b.values.max_abs_diff(&f.values) <= 1e-13 * f.values.norm_max());
        }
    }

    #[test]
    fn single_step_is_two_products() {
        let c = four_state();
        let theta = C64::new(1.0, 2.0);
        let q = TransformQuery::discrete(theta, 1, 0.25).unwrap();
        let g = g_discrete_forward(&c, 0.0, &q).unwrap();
        let ed = CVector::new(DiagD::new(c.grid()).exp_neg(theta)).unwrap();
        let pe = mat_vec(&c.p_delta().unwrap().to_complex(), &ed).unwrap();
        let w = mat_vec(&CMatrix::from_diag(ed.as_slice()), &pe).unwrap();
        for i in 0..4 {
            let x = c.states()[i];
            let expected = (w[i] - 1.0) / (theta * theta) + 2.0 * x / theta;
            assert!((g.values[i] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_queries() {
        let c = four_state();
        assert!(matches!(TransformQuery::discrete(C64::new(0.0, 1.0), 3, 0.25), Err(Error::Domain(_))));
        let q = TransformQuery::discrete(C64::new(1.0, 0.0), 3, 0.5).unwrap();
        assert!(matches!(g_discrete(&c, 0.0, &q), Err(Error::Argument(_))));
    }

    #[test]
    fn continuous_closed_forms() {
        let theta = C64::new(0.8, 1.1);
        let c = single_state(1.7);
        let q0 = TransformQuery::continuous(theta, 0.0).unwrap();
        assert!(g_continuous(&c, 0.05, &q0).unwrap().values.norm_max() < 1e-15);
        let t = 2.0;
        let g = g_continuous(&c, 0.0, &TransformQuery::continuous(theta, t).unwrap()).unwrap().values[0];
        let expected = ((-theta * 1.7 * t).exp() - 1.0) / (theta * theta) + 1.7 * t / theta;
        assert!((g - expected).norm() < 1e-13);
    }

    #[test]
    fn continuous_strategies_agree() {
        let c = four_state();
        for theta in [C64::new(2.0, 1.0), C64::new(9.2, 30.0)] {
            let q = TransformQuery::continuous(theta, 1.5).unwrap();
            let a = g_continuous_with(&c, 0.04, &q, ContinuousStrategy::ExpmAction).unwrap();
            let b = g_continuous_with(&c, 0.04, &q, ContinuousStrategy::FullExpm).unwrap();
            assert!(a.values.max_abs_diff(&b.values) <= 1e-12 * b.values.norm_max().max(1.0));
        }
    }

    #[test]
    fn rate_factors() {
        let (r, d, n) = (0.05, 0.1, 12);
        let direct: f64 = (0..=n).map(|j| (j as f64 * r * d).exp()).sum();
        assert!((discrete_rate_factor(r, d, n) - direct).abs() < 1e-12 * direct);
        assert_eq!(discrete_rate_factor(0.0, d, n), 13.0);
        assert!((continuous_rate_factor(0.05, 2.0) - ((0.1f64).exp() - 1.0) / 0.05).abs() < 1e-14);
        assert_eq!(continuous_rate_factor(0.0, 2.0), 2.0);
    }

    #[test]
    fn real_theta_first_term_is_positive_and_bounded() {
        let c = four_state();
        let n = 6;
        for th in [0.1, 1.0, 4.0] {
            let theta = C64::new(th, 0.0);
            let g = g_discrete(&c, 0.0, &TransformQuery::discrete(theta, n, 0.25).unwrap()).unwrap();
            let bound = (-th * (n + 1) as f64 * c.grid().min()).exp();
            for (i, &x) in c.states().iter().enumerate() {
                let first = (g.values[i] - x * (n + 1) as f64 / theta) * theta * theta + 1.0;
                assert!(first.re > 0.0 && first.re <= bound * (1.0 + 1e-12) && first.im.abs() < 1e-14);
            }
        }
    }
}
