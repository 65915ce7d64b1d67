//! Acceptance checks. Prints one PASS/FAIL line per criterion, followed by
//! indented details, and exits non-zero if any criterion fails.

use std::time::Instant;

use asian_ctmc::benchmarks::{all_tables, table, Parameters, Reference};
use asian_ctmc::chain::{Chain, Generator};
use asian_ctmc::inversion::{invert_laplace, InversionConfig};
use asian_ctmc::models::{GridSpec, ModelSpec};
use asian_ctmc::oracles::{enumerate_discrete_price, random_chain};
use asian_ctmc::pricing::{
    price_on_chain, price_table, timing_profile, Market, MonitoringSpec, PriceOptions, Pricer, PricingRequest,
    TableRequest,
};
use asian_ctmc::transforms::{g_discrete, g_discrete_forward, TransformQuery};
use asian_ctmc::validate::{run_suite, Property, SuiteConfig};
use asian_ctmc::C64;

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn request(model: ModelSpec, market: Market, strike: f64, monitoring: MonitoringSpec, n_states: usize) -> PricingRequest {
    PricingRequest {
        model,
        grid: GridSpec { n_states, ..GridSpec::default() },
        market,
        strike,
        monitoring,
        inversion: Default::default(),
        strategy: Default::default(),
        mean_term: Default::default(),
    }
}

fn c1_formula_inversion() -> Verdict {
    let start = Instant::now();
    let cfg = SuiteConfig { cases: 100, only: vec![Property::ZCoefficient, Property::MuInversion], ..Default::default() };
    let report = run_suite(&cfg);
    let seconds = start.elapsed().as_secs_f64();
    let (z, mu) = (&report.properties[0], &report.properties[1]);
    Verdict {
        pass: report.all_passed() && seconds < 60.0,
        summary: format!(
            "100 chains: z-coefficient max {:.2e} (tol 1e-9), mu-inversion max {:.2e} (tol 1e-6), {seconds:.1} s (limit 60 s)",
            z.worst, mu.worst
        ),
        details: report.text().lines().filter(|l| !l.starts_with("PASS")).map(String::from).collect(),
    }
}

/// Median seconds of `g_discrete` over a few repetitions.
fn backward_seconds(chain: &Chain, n: usize) -> f64 {
    let q = TransformQuery::discrete(C64::new(1.0, 2.0), n, chain.delta().unwrap()).unwrap();
    let mut times: Vec<f64> = (0..7)
        .map(|_| {
            let start = Instant::now();
            let mut sink = 0.0;
            let reps = 4;
            for _ in 0..reps {
                sink += g_discrete(chain, 0.05, &q).unwrap().values[0].re;
            }
            std::hint::black_box(sink);
            start.elapsed().as_secs_f64() / reps as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn c2_strategy_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let chain = random_chain(10, 2.0, 0.04, seed).unwrap();
        // small real parts keep the matrix power from vanishing next to the explicit terms
        for theta in [C64::new(0.01, 0.0), C64::new(0.05, 3.0), C64::new(0.44, -7.0)] {
            let q = TransformQuery::discrete(theta, 25, 0.04).unwrap();
            let a = g_discrete(&chain, 0.05, &q).unwrap().values;
            let b = g_discrete_forward(&chain, 0.05, &q).unwrap().values;
            worst = worst.max(a.max_abs_diff(&b) / b.norm_max());
        }
    }
    let sizes = [25usize, 50, 100, 200];
    let n_fixed = 250;
    let by_size: Vec<f64> =
        sizes.iter().map(|&s| backward_seconds(&random_chain(s, 2.0, 0.004, 1).unwrap(), n_fixed)).collect();
    let steps = [50usize, 100, 200, 400];
    let chain = random_chain(100, 2.0, 0.0025, 2).unwrap();
    let by_steps: Vec<f64> = steps.iter().map(|&n| backward_seconds(&chain, n)).collect();
    let f = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let (sn, ss) = (slope(&f(&sizes), &by_size), slope(&f(&steps), &by_steps));
    Verdict {
        pass: worst <= 1e-12 && (sn - 2.0).abs() <= 0.3 && (ss - 1.0).abs() <= 0.3,
        summary: format!(
            "backward vs forward max rel {worst:.2e} (tol 1e-12); cost slope in N {sn:.2} (2 +/- 0.3), in n {ss:.2} (1 +/- 0.3)"
        ),
        details: vec![
            format!("N {sizes:?} at n={n_fixed}: seconds {}", fmt_list(&by_size)),
            format!("n {steps:?} at N=100: seconds {}", fmt_list(&by_steps)),
        ],
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn c3_inversion_pairs() -> Verdict {
    let cfg = InversionConfig::default();
    let one = C64::new(1.0, 0.0);
    let mut checks: Vec<(String, f64)> = Vec::new();
    for k in [0.5, 1.0, 2.0, 5.0] {
        let v = invert_laplace(|s| Ok(one / (s * s)), k, &cfg).unwrap().value;
        checks.push((format!("k at {k}"), (v - k).abs()));
        let v = invert_laplace(|s| Ok(one / (s * (s + 1.0))), k, &cfg).unwrap().value;
        checks.push((format!("1-e^-k at {k}"), (v - (1.0 - (-k).exp())).abs()));
    }
    // the continuous transform of a one-state chain at 1 is that of (1 − k)⁺
    let chain = Chain::new(Generator::from_rows(vec![1.0], &[vec![0.0]]).unwrap()).unwrap();
    let g = |s: C64| {
        let q = TransformQuery::continuous(s, 1.0)?;
        Ok(asian_ctmc::transforms::g_continuous(&chain, 0.0, &q)?.values[0])
    };
    let v = invert_laplace(g, 0.5, &cfg).unwrap().value;
    checks.push(("one-state g_c at 0.5".into(), (v - 0.5).abs()));
    let c = 1.0;
    for k in [0.1, 0.25, 0.4, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0, 2.5, 3.0] {
        let g = |s: C64| Ok(c / s - (one - (-s * c).exp()) / (s * s));
        let v = invert_laplace(g, k, &cfg).unwrap().value;
        checks.push((format!("(1-k)+ at {k}"), (v - (c - k).max(0.0)).abs()));
    }
    let failed: Vec<String> =
        checks.iter().filter(|(_, e)| *e > 1e-8).map(|(name, e)| format!("{name}: error {e:.2e}")).collect();
    let worst = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    Verdict {
        pass: failed.is_empty(),
        summary: format!("{}/{} pairs within 1e-8, worst {worst:.2e}", checks.len() - failed.len(), checks.len()),
        details: failed,
    }
}

fn c4_enumeration() -> Verdict {
    let (r, n, start) = (0.03, 4, 1);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for seed in 0..50u64 {
        let chain = random_chain(4, 2.0, 0.25, seed).unwrap();
        let k = 1.0 + 0.1 * ((seed % 5) as f64 - 2.0);
        let exact = enumerate_discrete_price(&chain, r, 1.0, n, k, start).unwrap();
        let market = Market { spot: chain.states()[start], rate: r, maturity: 1.0 };
        let p = price_on_chain(&chain, start, market, k, MonitoringSpec::Discrete { n }, &PriceOptions::default())
            .unwrap();
        let err = (p.price - exact).abs();
        worst = worst.max(err);
        if err > 1e-6 {
            details.push(format!("seed {seed}: pipeline {:.9} enumeration {exact:.9}", p.price));
        }
    }
    Verdict { pass: details.is_empty(), summary: format!("50 seeds, worst abs diff {worst:.2e} (tol 1e-6)"), details }
}

fn c5_monte_carlo() -> Verdict {
    let cfg = SuiteConfig { cases: 5, mc_paths: 1_000_000, only: vec![Property::MonteCarlo], ..Default::default() };
    let report = run_suite(&cfg);
    let p = &report.properties[0];
    Verdict {
        pass: report.all_passed() && p.cases == 5,
        summary: format!("{}/{} models within 3 std errors at 1e6 paths, worst {:.2} se", p.passed, p.cases, p.worst),
        details: p.failures.iter().map(|f| format!("case {}: {} {}", f.case, f.detail, f.instance)).collect(),
    }
}

fn c6_tables() -> Verdict {
    let mut details = Vec::new();
    let (mut rows_ok, mut rows_total) = (0, 0);
    let pricer = Pricer::new();
    // parts with published parameters: compare every row with the CTMC column
    for part in all_tables() {
        if part.parameters.known().is_none() {
            continue;
        }
        let requests = part.requests(Reference::Ctmc);
        let rows = price_table(&requests).unwrap();
        for (row, req) in rows.iter().zip(&requests) {
            rows_total += 1;
            let dev = row.rel_err_pct.map(f64::abs).unwrap_or(f64::INFINITY);
            if dev <= part.tolerance_pct {
                rows_ok += 1;
                continue;
            }
            let mut sweep = Vec::new();
            for n_states in [50, 100, 200] {
                let r = PricingRequest { grid: GridSpec { n_states, ..req.request.grid.clone() }, ..req.request.clone() };
                let p = pricer.price(&r).map(|p| p.price).unwrap_or(f64::NAN);
                sweep.push(format!("N={n_states}: {p:.5} ({:+.2}%)", 100.0 * (p / req.benchmark.unwrap() - 1.0)));
            }
            details.push(format!(
                "{} K={} n={}: {:+.3}% vs CTMC {} (tol {}%); grid sweep {}",
                part.label,
                row.strike,
                row.monitoring.label(),
                row.rel_err_pct.unwrap_or(f64::NAN),
                req.benchmark.unwrap(),
                part.tolerance_pct,
                sweep.join(", ")
            ));
        }
    }
    // parts without parameters: doubling N must move at-the-money prices by < 0.2%
    let (mut conv_ok, mut conv_total, mut worst_change) = (0, 0, 0.0f64);
    let mut unavailable: Vec<_> = table(1).unwrap();
    unavailable.extend(table(3).unwrap().into_iter().filter(|p| p.parameters.known().is_none()));
    for part in unavailable {
        let Parameters::Unavailable { illustrative, market, .. } = &part.parameters else { continue };
        let mut monitorings: Vec<MonitoringSpec> = part.rows.iter().map(|r| r.monitoring).collect();
        monitorings.dedup();
        for mon in monitorings {
            conv_total += 1;
            let price = |n_states| {
                pricer.price(&request(illustrative.clone(), *market, market.spot, mon, n_states)).unwrap().price
            };
            let (a, b) = (price(50), price(100));
            let change = 100.0 * (b / a - 1.0).abs();
            worst_change = worst_change.max(change);
            if change < 0.2 {
                conv_ok += 1;
            } else {
                details.push(format!("{} n={}: ATM N=50 {a:.6} N=100 {b:.6} change {change:.3}%", part.label, mon.label()));
            }
        }
    }
    Verdict {
        pass: rows_ok == rows_total && conv_ok == conv_total,
        summary: format!(
            "{rows_ok}/{rows_total} rows with published parameters within tolerance; \
             {conv_ok}/{conv_total} illustrative ATM prices move < 0.2% from N=50 to 100 (worst {worst_change:.3}%)"
        ),
        details,
    }
}

fn c7_timing() -> Verdict {
    let cir = ModelSpec::Cir { kappa: 2.0, theta_bar: 1.0, sigma: 0.5, r: 0.05 };
    let market = Market { spot: 1.0, rate: 0.05, maturity: 1.0 };
    let discrete = timing_profile(&request(cir.clone(), market, 1.0, MonitoringSpec::Discrete { n: 250 }, 50), 5)
        .unwrap()
        .median_total;
    let continuous =
        timing_profile(&request(cir, market, 1.0, MonitoringSpec::Continuous, 50), 5).unwrap().median_total;
    let requests: Vec<TableRequest> = table(1).unwrap().iter().flat_map(|p| p.requests(Reference::Ctmc)).collect();
    let start = Instant::now();
    price_table(&requests).unwrap();
    let table_seconds = start.elapsed().as_secs_f64();
    Verdict {
        pass: discrete <= 0.1 && continuous <= 0.15 && table_seconds <= 5.0,
        summary: format!(
            "CIR N=50: n=250 {discrete:.3} s (limit 0.1), continuous {continuous:.3} s (limit 0.15); \
             {}-row table {table_seconds:.2} s (limit 5)",
            requests.len()
        ),
        details: vec![format!("threads: {}", rayon::current_num_threads())],
    }
}

fn c8_suite() -> Verdict {
    let report = run_suite(&SuiteConfig::default());
    let failed: Vec<&str> = report.properties.iter().filter(|p| !p.ok()).map(|p| p.property.name()).collect();
    let generators = report.properties.iter().find(|p| p.property == Property::ValidateGenerator).unwrap();
    Verdict {
        pass: failed.is_empty(),
        summary: format!(
            "{}/{} properties pass with the default seed; generator builds {}/{}",
            report.properties.len() - failed.len(),
            report.properties.len(),
            generators.passed,
            generators.cases
        ),
        details: report.text().lines().filter(|l| !l.starts_with("PASS")).map(String::from).collect(),
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("formula-inversion equivalence", c1_formula_inversion),
        ("strategy equivalence and cost scaling", c2_strategy_equivalence),
        ("closed-form inversion pairs", c3_inversion_pairs),
        ("exhaustive enumeration agreement", c4_enumeration),
        ("Monte Carlo agreement", c5_monte_carlo),
        ("table reproduction", c6_tables),
        ("timing", c7_timing),
        ("invariant suite", c8_suite),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {status} {name}: {} [{:.1} s]", i + 1, v.summary, start.elapsed().as_secs_f64());
        for d in &v.details {
            println!("    {d}");
        }
        failures += usize::from(!v.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
