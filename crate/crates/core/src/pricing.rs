//! End-to-end Asian call prices.
//!
//! With `Δ = T/n`, the discretely monitored price is
//! `e^{−rT}/(n+1) · v_d(n, (n+1)K)` and the continuously monitored one is
//! `e^{−rT}/T · v_c(T, TK)`, where `v_d`, `v_c` are the inverses of the strike
//! transforms evaluated at the spot state.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::inversion::{invert_vector, InversionConfig};
use crate::linalg::{expm, CMatrix, C64};
use crate::models::{build_model, GridSpec, ModelSpec};
use crate::transforms::{
    continuous_rate_factor, discrete_rate_factor, g_transform, ContinuousStrategy, Strategy, TransformQuery,
};

/// Spot, rate and maturity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Market {
    pub spot: f64,
    pub rate: f64,
    pub maturity: f64,
}

/// Averaging schedule of the option.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MonitoringSpec {
    /// `n + 1` equally spaced observations including the start date.
    Discrete { n: usize },
    Continuous,
}

impl MonitoringSpec {
    pub fn label(&self) -> String {
        match self {
            MonitoringSpec::Discrete { n } => n.to_string(),
            MonitoringSpec::Continuous => "inf".into(),
        }
    }
}

/// Source of the first-moment term `E[B_n]` or `E[A_t]` in the transforms.
///
/// The closed-form term `x Σ e^{jrΔ}` (or `x (e^{rt} − 1)/r`) is exact only
/// when the discounted chain is a martingale. A finite chain with `r > 0`
/// cannot be one at its top state, and mean-reverting models are not one
/// anywhere, so by default the exact chain moment is used. The two differ by
/// a `c/θ` term, which inverts to the constant `c`, so the switch is applied
/// as an additive correction after inversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanTerm {
    #[default]
    Chain,
    RiskNeutral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingRequest {
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub market: Market,
    pub strike: f64,
    pub monitoring: MonitoringSpec,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub strategy: ContinuousStrategy,
    #[serde(default)]
    pub mean_term: MeanTerm,
}

impl PricingRequest {
    pub fn validate(&self) -> Result<()> {
        let m = &self.market;
        if !(m.spot > 0.0 && m.spot.is_finite()) {
            return Err(Error::arg(format!("spot must be positive, got {}", m.spot)));
        }
        if !(m.maturity > 0.0 && m.maturity.is_finite()) {
            return Err(Error::arg(format!("maturity must be positive, got {}", m.maturity)));
        }
        if !m.rate.is_finite() {
            return Err(Error::arg("rate must be finite"));
        }
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return Err(Error::arg(format!("strike must be non-negative, got {}", self.strike)));
        }
        if let MonitoringSpec::Discrete { n } = self.monitoring {
            if n < 1 {
                return Err(Error::arg("discrete monitoring needs n >= 1"));
            }
        }
        self.inversion.validate()?;
        self.model.validate()?;
        self.grid.validate(m.spot)
    }

    /// Units in which the chain is built: the spot when normalizing, else 1.
    fn unit(&self) -> f64 {
        if self.inversion.normalize {
            self.market.spot
        } else {
            1.0
        }
    }

    /// Model, grid and spot expressed in pricing units.
    fn scaled_inputs(&self) -> (ModelSpec, GridSpec, f64) {
        let u = self.unit();
        let model = self.model.clone().with_rate(self.market.rate).normalized(u);
        let mut grid = self.grid.clone();
        grid.span = grid.span.map(|[lo, hi]| [lo / u, hi / u]);
        (model, grid, self.market.spot / u)
    }
}

/// Diagnostics attached to a price.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Error proxy of the inversion, in currency units.
    pub error_proxy: f64,
    /// The error proxy exceeded the configured tolerance.
    pub inversion_warning: bool,
    /// A tiny negative price was clamped to zero.
    pub clamped: bool,
    /// Final Euler series length (0 on the zero-strike path).
    pub series_terms: usize,
    /// Transform strategy, or `None` for the zero-strike path.
    pub strategy: Option<String>,
    pub n_states: usize,
    /// Seconds spent building the chain (0 on a cache hit).
    pub build_seconds: f64,
    /// Seconds spent on transforms and inversion.
    pub price_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub diagnostics: Diagnostics,
}

/// Negative prices above this are rounding noise and are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Clone)]
struct BuiltChain {
    chain: Chain,
    spot_index: usize,
}

/// Prices options, caching chains per model, grid and monitoring interval.
#[derive(Default)]
pub struct Pricer {
    cache: Mutex<HashMap<String, Arc<BuiltChain>>>,
}

impl Pricer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fetch or build the chain for `req`, returning the build time.
    fn chain_for(&self, req: &PricingRequest) -> Result<(Arc<BuiltChain>, f64)> {
        let (model, grid, spot) = req.scaled_inputs();
        let delta = match req.monitoring {
            MonitoringSpec::Discrete { n } => Some(req.market.maturity / n as f64),
            MonitoringSpec::Continuous => None,
        };
        let base_key = serde_json::to_string(&(&model, &grid, spot, req.market.maturity)).expect("serializable");
        let key = format!("{base_key}|{:?}", delta.map(f64::to_bits));
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok((hit.clone(), 0.0));
        }
        let start = Instant::now();
        let base = self.cache.lock().unwrap().get(&format!("{base_key}|None")).cloned();
        let base = match base {
            Some(b) => b,
            None => {
                let built = build_model(&model, &grid, spot, req.market.maturity)?;
                let b = Arc::new(BuiltChain { chain: Chain::new(built.generator)?, spot_index: built.spot_index });
                self.cache.lock().unwrap().insert(format!("{base_key}|None"), b.clone());
                b
            }
        };
        let built = match delta {
            None => base,
            Some(d) => {
                let b = Arc::new(BuiltChain { chain: base.chain.at_delta(d)?, spot_index: base.spot_index });
                self.cache.lock().unwrap().insert(key, b.clone());
                b
            }
        };
        Ok((built, start.elapsed().as_secs_f64()))
    }

    /// The chain used for `req`, in pricing units, with the spot state index.
    pub fn chain(&self, req: &PricingRequest) -> Result<(Chain, usize)> {
        req.validate()?;
        let (b, _) = self.chain_for(req)?;
        Ok((b.chain.clone(), b.spot_index))
    }

    pub fn price(&self, req: &PricingRequest) -> Result<PriceResult> {
        req.validate()?;
        let (built, build_seconds) = self.chain_for(req)?;
        let start = Instant::now();
        let unit = req.unit();
        let strike = req.strike / unit;
        let raw = price_on_chain(&built.chain, built.spot_index, req.market, strike, req.monitoring, &PriceOptions::of(req))?;
        let mut price = raw.price * unit;
        let error = raw.error * unit;
        let mut clamped = false;
        if price < 0.0 && price > -CLAMP_TOL {
            price = 0.0;
            clamped = true;
        }
        Ok(PriceResult {
            price,
            diagnostics: Diagnostics {
                error_proxy: error,
                inversion_warning: raw.warning,
                clamped,
                series_terms: raw.series_terms,
                strategy: raw.strategy.map(|s| s.to_string()),
                n_states: built.chain.len(),
                build_seconds,
                price_seconds: start.elapsed().as_secs_f64(),
            },
        })
    }
}

/// Raw output of [`price_on_chain`], in the units of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainPrice {
    pub price: f64,
    pub error: f64,
    pub warning: bool,
    pub series_terms: usize,
    pub strategy: Option<Strategy>,
}

/// Numerical settings for [`price_on_chain`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PriceOptions {
    pub inversion: InversionConfig,
    pub strategy: ContinuousStrategy,
    pub mean_term: MeanTerm,
}

impl PriceOptions {
    fn of(req: &PricingRequest) -> Self {
        Self { inversion: req.inversion, strategy: req.strategy, mean_term: req.mean_term }
    }
}

/// Price on an already built chain whose states are in the same units as
/// `strike`.
pub fn price_on_chain(
    chain: &Chain,
    spot_index: usize,
    market: Market,
    strike: f64,
    monitoring: MonitoringSpec,
    opts: &PriceOptions,
) -> Result<ChainPrice> {
    if spot_index >= chain.len() {
        return Err(Error::arg(format!("spot index {spot_index} outside a chain of {} states", chain.len())));
    }
    let (r, t) = (market.rate, market.maturity);
    let discount = (-r * t).exp();
    let (k_star, scale) = match monitoring {
        MonitoringSpec::Discrete { n } => ((n + 1) as f64 * strike, discount / (n + 1) as f64),
        MonitoringSpec::Continuous => (t * strike, discount / t),
    };
    let chain_mean = || match monitoring {
        MonitoringSpec::Discrete { n } => Ok::<f64, Error>(expected_sum_discrete(chain, n)?[spot_index]),
        MonitoringSpec::Continuous => Ok(expected_integral(chain, t)?[spot_index]),
    };
    let x0 = chain.states()[spot_index];
    let closed_mean = match monitoring {
        MonitoringSpec::Discrete { n } => x0 * discrete_rate_factor(r, t / n as f64, n),
        MonitoringSpec::Continuous => x0 * continuous_rate_factor(r, t),
    };
    if strike == 0.0 {
        let mean = match opts.mean_term {
            MeanTerm::Chain => chain_mean()?,
            MeanTerm::RiskNeutral => closed_mean,
        };
        return Ok(ChainPrice { price: scale * mean, error: 0.0, warning: false, series_terms: 0, strategy: None });
    }
    let correction = match opts.mean_term {
        MeanTerm::Chain => chain_mean()? - closed_mean,
        MeanTerm::RiskNeutral => 0.0,
    };
    let (inversion, strategy) = (&opts.inversion, opts.strategy);
    let used = Mutex::new(None);
    let g = |theta: C64| {
        let q = match monitoring {
            MonitoringSpec::Discrete { n } => TransformQuery::discrete(theta, n, t / n as f64)?,
            MonitoringSpec::Continuous => TransformQuery::continuous(theta, t)?,
        };
        let res = g_transform(chain, r, &q, strategy)?;
        used.lock().unwrap().get_or_insert(res.strategy);
        Ok(res.values)
    };
    let inv = invert_vector(g, k_star, inversion, spot_index)?;
    let strategy = *used.lock().unwrap();
    Ok(ChainPrice {
        price: scale * (inv.value + correction),
        error: scale * inv.error,
        warning: inv.warning,
        series_terms: inv.series_terms,
        strategy,
    })
}

/// `E[B_n] = Σ_{i=0}^{n} P(Δ)^i x` for every starting state.
pub fn expected_sum_discrete(chain: &Chain, n: usize) -> Result<Vec<f64>> {
    let p = chain.p_delta().ok_or_else(|| Error::arg("chain has no monitoring interval"))?;
    let len = chain.len();
    let mut term = chain.states().to_vec();
    let mut sum = term.clone();
    let zeros = vec![0.0; len];
    let (mut next, mut scratch) = (vec![0.0; len], vec![0.0; len]);
    for _ in 0..n {
        p.mul_split(&term, &zeros, &mut next, &mut scratch);
        std::mem::swap(&mut term, &mut next);
        for (s, v) in sum.iter_mut().zip(&term) {
            *s += v;
        }
    }
    Ok(sum)
}

/// `E[A_t] = ∫_0^t e^{Gu} x du`, read off the exponential of the augmented
/// generator `[[G, x], [0, 0]]`.
pub fn expected_integral(chain: &Chain, t: f64) -> Result<Vec<f64>> {
    let n = chain.len();
    let g = chain.generator();
    let x = chain.states();
    let aug = CMatrix::from_fn(n + 1, n + 1, |i, j| {
        C64::new(
            match (i < n, j < n) {
                (true, true) => g.q(i, j),
                (true, false) => x[i],
                _ => 0.0,
            },
            0.0,
        )
    })?;
    let e = expm(&aug, t)?;
    Ok((0..n).map(|i| e[(i, n)].re).collect())
}

/// Price one request with a fresh cache.
pub fn price_asian(req: &PricingRequest) -> Result<PriceResult> {
    Pricer::new().price(req)
}

/// A request together with an optional reference value.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRequest {
    pub request: PricingRequest,
    pub benchmark: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub strike: f64,
    pub monitoring: MonitoringSpec,
    pub benchmark: Option<f64>,
    pub result: std::result::Result<PriceResult, String>,
    /// `100 (price − benchmark) / benchmark`.
    pub rel_err_pct: Option<f64>,
    pub seconds: f64,
}

/// Price a list of requests concurrently, sharing chains between rows.
/// Failed rows keep their error message; the table is still produced.
pub fn price_table(requests: &[TableRequest]) -> Result<Vec<TableRow>> {
    if requests.is_empty() {
        return Err(Error::arg("price table needs at least one request"));
    }
    let pricer = Pricer::new();
    // build each distinct chain once before fanning out
    for req in requests {
        let _ = pricer.chain(&req.request);
    }
    Ok(requests
        .par_iter()
        .map(|row| {
            let start = Instant::now();
            let result = pricer.price(&row.request).map_err(|e| e.to_string());
            let rel_err_pct = match (&result, row.benchmark) {
                (Ok(p), Some(b)) if b != 0.0 => Some(100.0 * (p.price - b) / b),
                _ => None,
            };
            TableRow {
                strike: row.request.strike,
                monitoring: row.request.monitoring,
                benchmark: row.benchmark,
                result,
                rel_err_pct,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

/// Render rows as CSV with columns `K, n, benchmark, price, rel_err_pct, seconds`.
/// With `timings = false` the seconds column is left empty so that output is
/// reproducible byte for byte.
pub fn table_csv(rows: &[TableRow], timings: bool) -> String {
    let mut out = String::from("K,n,benchmark,price,rel_err_pct,seconds\n");
    for r in rows {
        let bench = r.benchmark.map(|b| format!("{b}")).unwrap_or_default();
        let price = match &r.result {
            Ok(p) => format!("{:.8}", p.price),
            Err(_) => "error".into(),
        };
        let rel = r.rel_err_pct.map(|e| format!("{e:.4}")).unwrap_or_else(|| "n/a".into());
        let secs = if timings { format!("{:.4}", r.seconds) } else { String::new() };
        out.push_str(&format!("{},{},{bench},{price},{rel},{secs}\n", r.strike, r.monitoring.label()));
    }
    out
}

/// Median timings over repeated pricing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimingProfile {
    /// Chain construction plus pricing, from a cold cache.
    pub median_total: f64,
    /// Chain construction alone (including `P(Δ)`).
    pub median_build: f64,
    /// Pricing on a cached chain.
    pub median_price: f64,
    pub repetitions: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn timing_profile(req: &PricingRequest, repetitions: usize) -> Result<TimingProfile> {
    if repetitions < 3 {
        return Err(Error::arg("timing needs at least 3 repetitions"));
    }
    let (mut total, mut build, mut price) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..repetitions {
        let pricer = Pricer::new();
        let start = Instant::now();
        let cold = pricer.price(req)?;
        total.push(start.elapsed().as_secs_f64());
        build.push(cold.diagnostics.build_seconds);
        let start = Instant::now();
        pricer.price(req)?;
        price.push(start.elapsed().as_secs_f64());
    }
    Ok(TimingProfile {
        median_total: median(total),
        median_build: median(build),
        median_price: median(price),
        repetitions,
    })
}

/// Prices across monitoring frequencies, ending with continuous monitoring.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub rows: Vec<(usize, f64)>,
    pub continuous: f64,
    /// Discrete prices move monotonically towards the continuous one.
    pub monotone: bool,
    /// `|price(n) − continuous|` per row.
    pub gaps: Vec<f64>,
}

pub fn convergence_sweep(req: &PricingRequest, n_values: &[usize]) -> Result<Sweep> {
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("n values must be a non-empty increasing list"));
    }
    let pricer = Pricer::new();
    let mut rows = Vec::new();
    for &n in n_values {
        let r = PricingRequest { monitoring: MonitoringSpec::Discrete { n }, ..req.clone() };
        rows.push((n, pricer.price(&r)?.price));
    }
    let r = PricingRequest { monitoring: MonitoringSpec::Continuous, ..req.clone() };
    let continuous = pricer.price(&r)?.price;
    let gaps: Vec<f64> = rows.iter().map(|&(_, p)| (p - continuous).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(Sweep { rows, continuous, monotone, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Placement;

    fn gbm_like(strike: f64, monitoring: MonitoringSpec) -> PricingRequest {
        PricingRequest {
            model: ModelSpec::Dejd { sigma: 0.2, lambda: 0.0, p_up: 0.5, eta1: 10.0, eta2: 10.0, r: 0.0 },
            grid: GridSpec::with_states(40),
            market: Market { spot: 100.0, rate: 0.05, maturity: 1.0 },
            strike,
            monitoring,
            inversion: InversionConfig::default(),
            strategy: ContinuousStrategy::Auto,
            mean_term: MeanTerm::Chain,
        }
    }

    #[test]
    fn zero_strike_discrete_is_the_expected_average() {
        let req = gbm_like(0.0, MonitoringSpec::Discrete { n: 12 });
        let expected: f64 = (0..=12).map(|i| 100.0 * (0.05 * i as f64 / 12.0).exp()).sum::<f64>() / 13.0
            * (-0.05f64).exp();
        let rn = PricingRequest { mean_term: MeanTerm::RiskNeutral, ..req.clone() };
        let res = price_asian(&rn).unwrap();
        assert!((res.price - expected).abs() < 1e-12 * expected, "{} vs {expected}", res.price);
        assert!(res.diagnostics.strategy.is_none());
        // the chain is a discounted martingale away from the edges of the grid
        let chain = price_asian(&req).unwrap().price;
        assert!((chain - expected).abs() < 1e-6 * expected, "{chain} vs {expected}");
    }

    #[test]
    fn zero_strike_continuous_is_the_expected_integral() {
        let req = gbm_like(0.0, MonitoringSpec::Continuous);
        let expected = 100.0 * (0.05f64).exp_m1() / 0.05 * (-0.05f64).exp();
        let rn = PricingRequest { mean_term: MeanTerm::RiskNeutral, ..req.clone() };
        assert!((price_asian(&rn).unwrap().price - expected).abs() < 1e-12 * expected);
        let chain = price_asian(&req).unwrap().price;
        assert!((chain - expected).abs() < 1e-6 * expected, "{chain} vs {expected}");
    }

    #[test]
    fn mean_term_shifts_prices_by_a_constant() {
        let a = gbm_like(0.0, MonitoringSpec::Discrete { n: 12 });
        let b = gbm_like(100.0, MonitoringSpec::Discrete { n: 12 });
        let shift = |r: &PricingRequest| {
            let rn = PricingRequest { mean_term: MeanTerm::RiskNeutral, ..r.clone() };
            price_asian(r).unwrap().price - price_asian(&rn).unwrap().price
        };
        assert!((shift(&a) - shift(&b)).abs() < 1e-12);
    }

    #[test]
    fn small_strike_approaches_zero_strike() {
        let a = price_asian(&gbm_like(0.0, MonitoringSpec::Discrete { n: 12 })).unwrap().price;
        let b = price_asian(&gbm_like(1e-3, MonitoringSpec::Discrete { n: 12 })).unwrap().price;
        assert!((a - b - 1e-3 * (-0.05f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn monotone_in_strike_and_bounded() {
        let mut last = f64::INFINITY;
        for k in [80.0, 90.0, 100.0, 110.0, 120.0] {
            let p = price_asian(&gbm_like(k, MonitoringSpec::Continuous)).unwrap().price;
            assert!(p <= last && p >= 0.0);
            last = p;
        }
    }

    #[test]
    fn normalization_does_not_change_prices() {
        let req = gbm_like(95.0, MonitoringSpec::Discrete { n: 12 });
        let raw = PricingRequest { inversion: InversionConfig { normalize: false, ..req.inversion }, ..req.clone() };
        let a = price_asian(&req).unwrap().price;
        let b = price_asian(&raw).unwrap().price;
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn single_state_chain_prices_are_flat() {
        let mut req = gbm_like(0.9, MonitoringSpec::Discrete { n: 3 });
        req.grid.placement = Placement::Uniform;
        let (chain, s) = Pricer::new().chain(&req).unwrap();
        assert!(s < chain.len());
        let one = Chain::new(crate::chain::Generator::from_rows(vec![1.0], &[vec![0.0]]).unwrap()).unwrap();
        let market = Market { spot: 1.0, rate: 0.0, maturity: 1.0 };
        let mut prices = Vec::new();
        for n in [1, 4, 16] {
            let c = one.at_delta(1.0 / n as f64).unwrap();
            let p = price_on_chain(&c, 0, market, 0.9, MonitoringSpec::Discrete { n }, &PriceOptions::default())
                .unwrap();
            prices.push(p.price);
        }
        let pc =
            price_on_chain(&one, 0, market, 0.9, MonitoringSpec::Continuous, &PriceOptions::default())
                .unwrap();
        prices.push(pc.price);
        for p in prices {
            assert!((p - 0.1).abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn table_handles_failures_and_benchmarks() {
        let good = TableRequest { request: gbm_like(100.0, MonitoringSpec::Discrete { n: 12 }), benchmark: Some(5.0) };
        let bad = TableRequest { request: PricingRequest { strike: -1.0, ..good.request.clone() }, benchmark: None };
        let rows = price_table(&[good, bad]).unwrap();
        assert!(rows[0].result.is_ok() && rows[0].rel_err_pct.is_some());
        assert!(rows[1].result.is_err() && rows[1].rel_err_pct.is_none());
        let csv = table_csv(&rows, false);
        assert!(csv.starts_with("K,n,benchmark,price,rel_err_pct,seconds\n"));
        assert!(csv.lines().nth(2).unwrap().contains("error,n/a"));
        assert!(price_table(&[]).is_err());
    }

    #[test]
    fn sweep_orders_and_checks() {
        let req = gbm_like(100.0, MonitoringSpec::Continuous);
        let s = convergence_sweep(&req, &[12, 50]).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(convergence_sweep(&req, &[50, 12]).is_err());
    }
}
