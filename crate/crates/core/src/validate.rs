//! Seeded property suite behind `asian-ctmc validate`.
//!
//! Each property draws its cases from a ChaCha stream keyed by
//! `(seed, property, case)`, so any single case can be rerun on its own with
//! `--seed S --only NAME --first-case I --cases 1`. A failing case carries a
//! JSON dump of the instance it was checking.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::benchmarks::{cev, cgmy_fm, kou_fm, merton_fm};
use crate::chain::{validate_generator, Chain, Generator};
use crate::error::{Error, Result};
use crate::inversion::{invert_laplace, InversionConfig};
use crate::linalg::{CVector, RMatrix, C64};
use crate::models::{build_model, GridSpec, ModelSpec};
use crate::oracles::{
    enumerate_discrete_price, l_continuous, mc_continuous_price, mu_invert, neumann_resolvent, random_generator,
    z_coefficient, McConfig,
};
use crate::pricing::{price_on_chain, Market, MonitoringSpec, PriceOptions};
use crate::transforms::{
    discrete_rate_factor, g_continuous, g_continuous_with, g_discrete, g_discrete_forward, ContinuousStrategy,
    TransformQuery,
};

/// Source of random generators; swapped out to test the suite itself.
pub type GeneratorSource = fn(usize, f64, u64) -> Result<Generator>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    /// Random and model-built generators satisfy the generator invariants.
    ValidateGenerator,
    /// Contour coefficients of the discrete double transform equal `g_d`.
    ZCoefficient,
    /// Euler inversion of the continuous double transform in `μ` equals `g_c`.
    MuInversion,
    /// Pipeline prices equal exhaustive path sums on 4-state chains.
    Enumeration,
    /// Backward and forward `g_d` agree, and so do both `g_c` exponentials.
    StrategyEquivalence,
    /// Neumann partial sums converge monotonically to the resolvent.
    NeumannExpansion,
    /// The closed-form geometric factor equals the direct sum.
    RateFactor,
    /// Euler inversion reproduces the smooth pairs `k`, `1 − e^{−k}`, `e^{−ck}`.
    InversionPairs,
    /// Euler inversion reproduces `(c − k)⁺`, whose transform carries `e^{−θc}`.
    KinkedPair,
    /// Continuous pipeline prices lie within 3 standard errors of exact simulation.
    MonteCarlo,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::ValidateGenerator,
        Property::ZCoefficient,
        Property::MuInversion,
        Property::Enumeration,
        Property::StrategyEquivalence,
        Property::NeumannExpansion,
        Property::RateFactor,
        Property::InversionPairs,
        Property::KinkedPair,
        Property::MonteCarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::ValidateGenerator => "validate-generator",
            Property::ZCoefficient => "z-coefficient",
            Property::MuInversion => "mu-inversion",
            Property::Enumeration => "enumeration",
            Property::StrategyEquivalence => "strategy-equivalence",
            Property::NeumannExpansion => "neumann-expansion",
            Property::RateFactor => "rate-factor",
            Property::InversionPairs => "inversion-pairs",
            Property::KinkedPair => "kinked-pair",
            Property::MonteCarlo => "monte-carlo",
        }
    }

    /// Largest acceptable value of the case metric.
    pub fn tolerance(self) -> f64 {
        match self {
            Property::ValidateGenerator => 0.0,
            Property::ZCoefficient => 1e-9,
            Property::MuInversion => 1e-6,
            Property::Enumeration => 1e-6,
            Property::StrategyEquivalence => 1.0,
            Property::NeumannExpansion => 1e-10,
            Property::RateFactor => 1e-12,
            Property::InversionPairs | Property::KinkedPair => 1e-8,
            Property::MonteCarlo => 3.0,
        }
    }

    /// What the metric measures, for the report.
    pub fn metric(self) -> &'static str {
        match self {
            Property::ValidateGenerator => "violations",
            Property::ZCoefficient | Property::MuInversion => "max abs diff",
            Property::Enumeration | Property::InversionPairs | Property::KinkedPair => "abs diff",
            Property::StrategyEquivalence => "rel diff / bound",
            Property::NeumannExpansion | Property::RateFactor => "rel diff",
            Property::MonteCarlo => "std errors",
        }
    }

    fn index(self) -> u64 {
        Property::ALL.iter().position(|&p| p == self).expect("listed") as u64
    }

    /// Monte Carlo runs one case per model regardless of `cases`.
    fn case_count(self, cases: usize) -> usize {
        match self {
            Property::MonteCarlo => MC_MODELS.min(cases.max(1)),
            _ => cases,
        }
    }
}

impl FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Property::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown property `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    /// Index of the first case, for replaying a single failure.
    pub first_case: usize,
    pub mc_paths: usize,
    /// Restrict the run to these properties; empty means all.
    pub only: Vec<Property>,
}

pub const DEFAULT_SEED: u64 = 2024;

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, cases: 100, first_case: 0, mc_paths: 1_000_000, only: Vec::new() }
    }
}

/// First failing case of a property.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub case: usize,
    pub detail: String,
    pub instance: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub cases: usize,
    pub passed: usize,
    /// Largest metric over the cases that produced one.
    pub worst: f64,
    pub failures: Vec<Failure>,
    pub seconds: f64,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub first_case: usize,
    pub properties: Vec<PropertyReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(PropertyReport::ok)
    }

    /// Human-readable summary with replay hints for failures.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            let status = if p.ok() { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status} {:<22} {:>4}/{:<4} worst {} {:.3e} (tol {:.0e})  {:.2}s",
                p.property.name(),
                p.passed,
                p.cases,
                p.property.metric(),
                p.worst,
                p.property.tolerance(),
                p.seconds
            );
            for f in p.failures.iter().take(3) {
                let _ = writeln!(out, "  case {}: {}", f.case, f.detail);
                let _ = writeln!(
                    out,
                    "  replay: asian-ctmc validate --seed {} --only {} --first-case {} --cases 1",
                    self.seed,
                    p.property.name(),
                    f.case
                );
                let _ = writeln!(out, "  instance: {}", f.instance);
            }
        }
        let failed = self.properties.iter().filter(|p| !p.ok()).count();
        let _ = writeln!(out, "{} of {} properties passed", self.properties.len() - failed, self.properties.len());
        out
    }

    /// One row per property. Contains no timings, so equal seeds give equal bytes.
    pub fn csv(&self) -> String {
        let mut out = String::from("property,cases,passed,worst,tolerance,first_failure\n");
        for p in &self.properties {
            let first = p.failures.first().map_or(String::new(), |f| f.case.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{:.6e},{:e},{}",
                p.property.name(),
                p.cases,
                p.passed,
                p.worst,
                p.property.tolerance(),
                first
            );
        }
        out
    }
}

/// Run the suite with the default random generator.
pub fn run_suite(cfg: &SuiteConfig) -> Report {
    run_suite_with(cfg, random_generator)
}

/// Run the suite drawing random generators from `source`.
pub fn run_suite_with(cfg: &SuiteConfig, source: GeneratorSource) -> Report {
    let selected: Vec<Property> =
        if cfg.only.is_empty() { Property::ALL.to_vec() } else { cfg.only.clone() };
    let properties = selected.into_iter().map(|p| run_property(p, cfg, source)).collect();
    Report { seed: cfg.seed, first_case: cfg.first_case, properties }
}

struct Ctx {
    source: GeneratorSource,
    mc_paths: usize,
    seed: u64,
}

/// Instance description plus the metric or the error that replaced it.
type Outcome = (Value, Result<f64>);

fn run_property(property: Property, cfg: &SuiteConfig, source: GeneratorSource) -> PropertyReport {
    let start = Instant::now();
    let ctx = Ctx { source, mc_paths: cfg.mc_paths, seed: cfg.seed };
    let cases = property.case_count(cfg.cases);
    let first = if property == Property::MonteCarlo { cfg.first_case.min(MC_MODELS - 1) } else { cfg.first_case };
    let cases = if property == Property::MonteCarlo { cases.min(MC_MODELS - first) } else { cases };
    let outcomes: Vec<(usize, Outcome)> = (first..first + cases)
        .into_par_iter()
        .map(|case| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(property.index() << 32 | case as u64);
            (case, run_case(property, case, &mut rng, &ctx))
        })
        .collect();
    let tol = property.tolerance();
    let mut report =
        PropertyReport { property, cases, passed: 0, worst: 0.0, failures: Vec::new(), seconds: 0.0 };
    for (case, (instance, result)) in outcomes {
        match result {
            Ok(metric) if metric <= tol => {
                report.passed += 1;
                report.worst = report.worst.max(metric);
            }
            Ok(metric) => {
                report.worst = report.worst.max(metric);
                let detail = format!("{} {metric:.3e} exceeds {tol:.0e}", property.metric());
                report.failures.push(Failure { case, detail, instance });
            }
            Err(e) => report.failures.push(Failure { case, detail: e.to_string(), instance }),
        }
    }
    report.seconds = start.elapsed().as_secs_f64();
    report
}

fn run_case(property: Property, case: usize, rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    match property {
        Property::ValidateGenerator => generator_case(case, rng, ctx),
        Property::ZCoefficient => z_case(rng, ctx),
        Property::MuInversion => mu_case(rng, ctx),
        Property::Enumeration => enumeration_case(rng, ctx),
        Property::StrategyEquivalence => strategy_case(rng, ctx),
        Property::NeumannExpansion => neumann_case(rng, ctx),
        Property::RateFactor => rate_case(rng),
        Property::InversionPairs => pair_case(rng),
        Property::KinkedPair => kinked_case(rng),
        Property::MonteCarlo => mc_case(case, ctx),
    }
}

fn random_theta(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(0.5..3.0), rng.random_range(-3.0..3.0))
}

fn chain_json(chain: &Chain) -> Value {
    serde_json::to_value(chain.snapshot()).expect("snapshot serializes")
}

fn draw_chain(rng: &mut ChaCha8Rng, ctx: &Ctx, max_states: usize, delta: f64) -> Result<Chain> {
    let n = rng.random_range(1..=max_states);
    let max_rate = rng.random_range(0.1..3.0);
    let seed = rng.random::<u64>();
    Chain::with_delta((ctx.source)(n, max_rate, seed)?, delta)
}

/// Benchmark-style model specs used for build checks and simulation.
fn model_zoo() -> Vec<(ModelSpec, Market)> {
    let fm = Market { spot: 100.0, rate: 0.0367, maturity: 1.0 };
    let cev_market = Market { spot: 100.0, rate: 0.05, maturity: 1.0 };
    vec![
        (ModelSpec::Cir { kappa: 2.0, theta_bar: 1.0, sigma: 0.5, r: 0.05 }, Market { spot: 1.0, rate: 0.05, maturity: 1.0 }),
        (cev(-0.25), cev_market),
        (kou_fm(), fm),
        (merton_fm(), fm),
        (cgmy_fm(), fm),
        (cev(0.25), cev_market),
        (cev(-0.5), cev_market),
    ]
}

const MC_MODELS: usize = 5;

fn generator_case(case: usize, rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let violations = |g: &Generator| validate_generator(g).len() as f64;
    if case % 2 == 0 {
        let n = rng.random_range(1..=60);
        let max_rate = rng.random_range(0.1..50.0);
        let seed = rng.random::<u64>();
        let instance = json!({ "source": "random", "n": n, "max_rate": max_rate, "seed": seed });
        match (ctx.source)(n, max_rate, seed) {
            Ok(g) => (instance, Ok(violations(&g))),
            Err(e) => (instance, Err(e)),
        }
    } else {
        let zoo = model_zoo();
        let (model, market) = &zoo[(case / 2) % zoo.len()];
        let grid = GridSpec { n_states: rng.random_range(10..=200), ..GridSpec::default() };
        let model = model.clone().normalized(market.spot);
        let instance = json!({ "source": "model", "model": model, "grid": grid, "maturity": market.maturity });
        match build_model(&model, &grid, 1.0, market.maturity) {
            Ok(b) => (instance, Ok(violations(&b.generator))),
            Err(e) => (instance, Err(e)),
        }
    }
}

fn z_case(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let delta = rng.random_range(0.05..0.5);
    let r = rng.random_range(0.0..0.1);
    let theta = random_theta(rng);
    let chain = match draw_chain(rng, ctx, 6, delta) {
        Ok(c) => c,
        Err(e) => return (Value::Null, Err(e)),
    };
    let instance = json!({ "chain": chain_json(&chain), "r": r, "theta": [theta.re, theta.im], "n": "0..=8" });
    let check = || -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in 0..=8 {
            let direct = g_discrete(&chain, r, &TransformQuery::discrete(theta, n, delta)?)?.values;
            worst = worst.max(z_coefficient(&chain, r, theta, n)?.max_abs_diff(&direct));
        }
        Ok(worst)
    };
    (instance, check())
}

fn mu_case(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let r = rng.random_range(0.0..0.1);
    let theta = random_theta(rng);
    let chain = match draw_chain(rng, ctx, 6, 0.1) {
        Ok(c) => c,
        Err(e) => return (Value::Null, Err(e)),
    };
    let instance = json!({ "chain": chain_json(&chain), "r": r, "theta": [theta.re, theta.im], "t": [0.25, 1.0, 4.0] });
    let check = || -> Result<f64> {
        let cfg = InversionConfig::default();
        let mut worst: f64 = 0.0;
        for t in [0.25, 1.0, 4.0] {
            let direct = g_continuous(&chain, r, &TransformQuery::continuous(theta, t)?)?.values;
            worst = worst.max(mu_invert(&chain, r, theta, t, &cfg)?.max_abs_diff(&direct));
        }
        Ok(worst)
    };
    (instance, check())
}

fn enumeration_case(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let (n, maturity) = (4, 1.0);
    let max_rate = rng.random_range(0.5..3.0);
    let seed = rng.random::<u64>();
    let r = rng.random_range(0.0..0.08);
    let start = rng.random_range(0..4);
    let chain = match (ctx.source)(4, max_rate, seed).and_then(|g| Chain::with_delta(g, maturity / n as f64)) {
        Ok(c) => c,
        Err(e) => return (json!({ "max_rate": max_rate, "seed": seed }), Err(e)),
    };
    let x0 = chain.states()[start];
    let strike = x0 * rng.random_range(0.8..1.2);
    let instance =
        json!({ "chain": chain_json(&chain), "r": r, "n": n, "maturity": maturity, "strike": strike, "start": start });
    let check = || -> Result<f64> {
        let exact = enumerate_discrete_price(&chain, r, maturity, n, strike, start)?;
        let market = Market { spot: x0, rate: r, maturity };
        let p = price_on_chain(&chain, start, market, strike, MonitoringSpec::Discrete { n }, &PriceOptions::default())?;
        Ok((p.price - exact).abs())
    };
    (instance, check())
}

fn strategy_case(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let n = rng.random_range(1..=25);
    let t = rng.random_range(0.1..5.0);
    let r = rng.random_range(0.0..0.1);
    // log-uniform real part: large ones shrink the matrix term below the explicit ones
    let theta = C64::new(10f64.powf(rng.random_range(-2.0..0.5)), rng.random_range(-5.0..5.0));
    let chain = match draw_chain(rng, ctx, 10, t / n as f64) {
        Ok(c) => c,
        Err(e) => return (Value::Null, Err(e)),
    };
    let instance = json!({ "chain": chain_json(&chain), "r": r, "theta": [theta.re, theta.im], "n": n, "t": t });
    let rel = |a: &CVector, b: &CVector| a.max_abs_diff(b) / b.norm_max().max(f64::MIN_POSITIVE);
    let check = || -> Result<f64> {
        let dq = TransformQuery::discrete(theta, n, t / n as f64)?;
        let discrete = rel(&g_discrete(&chain, r, &dq)?.values, &g_discrete_forward(&chain, r, &dq)?.values);
        let cq = TransformQuery::continuous(theta, t)?;
        let action = g_continuous_with(&chain, r, &cq, ContinuousStrategy::ExpmAction)?.values;
        let full = g_continuous_with(&chain, r, &cq, ContinuousStrategy::FullExpm)?.values;
        // bounds: 1e-12 between the two discrete orders, 1e-10 between the exponentials
        Ok((discrete / 1e-12).max(rel(&action, &full) / 1e-10))
    };
    (instance, check())
}

fn neumann_case(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Outcome {
    let theta = random_theta(rng);
    let chain = match draw_chain(rng, ctx, 8, 0.1) {
        Ok(c) => c,
        Err(e) => return (Value::Null, Err(e)),
    };
    let norm = chain.generator().shifted(theta).norm_inf();
    let phase = rng.random_range(-1.0..1.0);
    let mu = C64::from_polar(2.0 * norm.max(0.5), phase);
    let instance = json!({ "chain": chain_json(&chain), "theta": [theta.re, theta.im], "mu": [mu.re, mu.im] });
    let check = || -> Result<f64> {
        // L_c minus its explicit terms, times θ², is the resolvent applied to 1
        let lc = l_continuous(&chain, 0.0, theta, mu)?;
        let exact: Vec<C64> = lc
            .iter()
            .zip(chain.states())
            .map(|(&v, &x)| (v - x / (theta * mu * mu)) * theta * theta + 1.0 / mu)
            .collect();
        let exact = CVector::new(exact)?;
        let mut previous = f64::INFINITY;
        let mut residual = 0.0;
        for terms in [0, 5, 10, 20, 40, 60] {
            residual = neumann_resolvent(&chain, theta, mu, terms)?.max_abs_diff(&exact) / exact.norm_max();
            if residual > previous && residual > 1e-14 {
                return Err(Error::numeric(format!("residual rose from {previous:.3e} to {residual:.3e}")));
            }
            previous = residual;
        }
        Ok(residual)
    };
    (instance, check())
}

fn rate_case(rng: &mut ChaCha8Rng) -> Outcome {
    let r = rng.random_range(-0.1..0.2);
    let delta = rng.random_range(0.001..0.5);
    let n = rng.random_range(0..500);
    let instance = json!({ "r": r, "delta": delta, "n": n });
    let direct: f64 = (0..=n).map(|j| (j as f64 * r * delta).exp()).sum();
    (instance, Ok((discrete_rate_factor(r, delta, n) - direct).abs() / direct))
}

fn pair_case(rng: &mut ChaCha8Rng) -> Outcome {
    let k = rng.random_range(0.05..5.0);
    let c = rng.random_range(0.1..3.0);
    let instance = json!({ "k": k, "c": c });
    let cfg = InversionConfig::default();
    let check = || -> Result<f64> {
        let one = C64::new(1.0, 0.0);
        let identity = invert_laplace(|s| Ok(one / (s * s)), k, &cfg)?.value - k;
        let saturating = invert_laplace(|s| Ok(one / s - one / (s + 1.0)), k, &cfg)?.value - (1.0 - (-k).exp());
        let decay = invert_laplace(|s| Ok(one / (s + c)), k, &cfg)?.value - (-c * k).exp();
        Ok(identity.abs().max(saturating.abs()).max(decay.abs()))
    };
    (instance, check())
}

fn kinked_case(rng: &mut ChaCha8Rng) -> Outcome {
    let k = rng.random_range(0.05..5.0);
    let c = rng.random_range(0.5..3.0);
    let instance = json!({ "k": k, "c": c });
    let cfg = InversionConfig::default();
    let one = C64::new(1.0, 0.0);
    let g = |s: C64| Ok(c / s - (one - (-s * c).exp()) / (s * s));
    (instance, invert_laplace(g, k, &cfg).map(|r| (r.value - (c - k).max(0.0)).abs()))
}

/// Continuous at-the-money price on each model's normalized chain against
/// simulation of the same chain.
fn mc_case(case: usize, ctx: &Ctx) -> Outcome {
    let (model, market) = model_zoo().swap_remove(case);
    let model = model.normalized(market.spot);
    let grid = GridSpec::default();
    let instance = json!({ "model": model, "grid": grid, "maturity": market.maturity, "strike": 1.0, "paths": ctx.mc_paths });
    let check = || -> Result<f64> {
        let built = build_model(&model, &grid, 1.0, market.maturity)?;
        let chain = Chain::new(built.generator)?;
        let unit = Market { spot: 1.0, ..market };
        let pipeline =
            price_on_chain(&chain, built.spot_index, unit, 1.0, MonitoringSpec::Continuous, &PriceOptions::default())?;
        let cfg = McConfig { paths: ctx.mc_paths, seed: ctx.seed ^ case as u64, batches: 100.min(ctx.mc_paths) };
        let mc = mc_continuous_price(&chain, market.rate, market.maturity, 1.0, built.spot_index, &cfg)?;
        Ok((pipeline.price - mc.price).abs() / mc.std_error.max(f64::MIN_POSITIVE))
    };
    (instance, check())
}

/// A random generator with one off-diagonal rate made negative: a fixture
/// for checking that the suite notices broken generators.
pub fn broken_generator(n: usize, max_rate: f64, seed: u64) -> Result<Generator> {
    let g = random_generator(n, max_rate, seed)?;
    if n < 2 {
        return Ok(g);
    }
    let mut data = g.rates().as_slice().to_vec();
    data[1] = -data[1].abs() - 0.1;
    data[0] = -data[1..n].iter().sum::<f64>();
    Generator::new(g.grid().clone(), RMatrix::new(n, n, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(only: Vec<Property>) -> SuiteConfig {
        SuiteConfig { cases: 6, mc_paths: 20_000, only, ..SuiteConfig::default() }
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert!("nope".parse::<Property>().is_err());
    }

    #[test]
    fn cheap_properties_pass() {
        let only = vec![
            Property::ZCoefficient,
            Property::Enumeration,
            Property::StrategyEquivalence,
            Property::NeumannExpansion,
            Property::RateFactor,
            Property::InversionPairs,
        ];
        let report = run_suite(&quick(only));
        assert!(report.all_passed(), "{}", report.text());
    }

    #[test]
    fn broken_generators_are_caught() {
        let cfg = quick(vec![Property::ValidateGenerator]);
        let report = run_suite_with(&cfg, broken_generator);
        assert!(!report.all_passed());
        let p = &report.properties[0];
        assert!(p.failures.iter().all(|f| f.case % 2 == 0));
        assert!(report.text().contains("--only validate-generator --first-case 0"));
        assert!(run_suite(&cfg).all_passed());
    }

    #[test]
    fn reruns_are_identical_and_cases_replay() {
        let cfg = quick(vec![Property::RateFactor, Property::Enumeration]);
        assert_eq!(run_suite(&cfg).csv(), run_suite(&cfg).csv());
        let full = run_suite(&cfg);
        let single = run_suite(&SuiteConfig { first_case: 3, cases: 1, ..cfg });
        let worst_single = single.properties[0].worst;
        assert!(worst_single <= full.properties[0].worst);
        assert_eq!(single.properties[0].cases, 1);
    }
}
