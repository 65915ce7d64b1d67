use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asian_ctmc::benchmarks::{self, Parameters, Reference};
use asian_ctmc::config::{load_request, with_overrides};
use asian_ctmc::pricing::{
    convergence_sweep, price_table, table_csv, MonitoringSpec, Pricer, PricingRequest, TableRequest,
};
use asian_ctmc::validate::{self, broken_generator, Property, SuiteConfig};
use asian_ctmc::{Error, Result};

/// Environment variable that fixes the worker thread count.
const THREADS_VAR: &str = "ASIAN_CTMC_THREADS";

#[derive(Parser)]
#[command(name = "asian-ctmc", version, about = "Asian option prices under CTMC approximations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one option described by a TOML config.
    Price(PriceArgs),
    /// Price a list of options and print a CSV table.
    Table(TableArgs),
    /// Run the seeded property suite.
    Validate(ValidateArgs),
    /// Show how a price moves with the monitoring frequency or the grid size.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct PriceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set grid.n_states=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    Ctmc,
    Benchmark,
}

#[derive(Args)]
struct TableArgs {
    /// Reprice a built-in reference table (1 to 5).
    #[arg(long, conflicts_with = "config")]
    benchmark_table: Option<u8>,
    /// Config files to price; repeatable.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Strikes to price each config at, instead of its own strike.
    #[arg(long, value_delimiter = ',')]
    strikes: Vec<f64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Published column compared against for built-in tables.
    #[arg(long, value_enum, default_value = "ctmc")]
    reference: ReferenceArg,
    /// Leave the seconds column empty so output is reproducible.
    #[arg(long)]
    omit_timing: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = validate::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    cases: usize,
    /// Index of the first case; with `--cases 1` this replays one case.
    #[arg(long, default_value_t = 0)]
    first_case: usize,
    #[arg(long, default_value_t = 1_000_000)]
    mc_paths: usize,
    /// Run only the named properties; repeatable.
    #[arg(long)]
    only: Vec<String>,
    /// Also write the per-property results as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Draw random generators from a deliberately broken source.
    #[arg(long, hide = true)]
    inject_broken_generator: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Monitoring counts, increasing; the continuous price is appended.
    #[arg(long, value_delimiter = ',', default_value = "12,25,50,100,250")]
    n: Vec<usize>,
    /// Grid sizes to compare instead of monitoring counts.
    #[arg(long, value_delimiter = ',')]
    n_states: Vec<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Price(a) => run_price(a),
        Command::Table(a) => run_table(a),
        Command::Validate(a) => run_validate(a),
        Command::Sweep(a) => run_sweep(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))
}

/// Write to `output` or stdout. A closed stdout (`| head`) is not an error.
fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn run_price(a: PriceArgs) -> Result<u8> {
    let req = load_request(&a.config, &a.overrides)?;
    let res = Pricer::new().price(&req)?;
    if a.json {
        let text = serde_json::to_string_pretty(&res).expect("results serialize");
        emit(None, &(text + "\n"))?;
        return Ok(0);
    }
    let d = &res.diagnostics;
    let mut text = format!("price         {:.8}\n", res.price);
    text += &format!("error proxy   {:.3e}\n", d.error_proxy);
    text += &format!("warning       {}\n", if d.inversion_warning { "yes" } else { "no" });
    text += &format!("series terms  {}\n", d.series_terms);
    text += &format!("strategy      {}\n", d.strategy.as_deref().unwrap_or("zero-strike"));
    text += &format!("states        {}\n", d.n_states);
    text += &format!("build         {:.4} s\n", d.build_seconds);
    text += &format!("pricing       {:.4} s\n", d.price_seconds);
    if d.clamped {
        text += "note          a tiny negative price was clamped to zero\n";
    }
    emit(None, &text)?;
    Ok(0)
}

fn table_requests(a: &TableArgs) -> Result<Vec<TableRequest>> {
    let mut out = Vec::new();
    if let Some(n) = a.benchmark_table {
        let parts = benchmarks::table(n).ok_or_else(|| Error::Config(format!("no built-in table {n}; use 1 to 5")))?;
        let reference = match a.reference {
            ReferenceArg::Ctmc => Reference::Ctmc,
            ReferenceArg::Benchmark => Reference::Benchmark,
        };
        for part in parts {
            if let Parameters::Unavailable { reason, .. } = &part.parameters {
                eprintln!("note: {}: {reason}; pricing with illustrative parameters", part.label);
            }
            for mut row in part.requests(reference) {
                row.request = with_overrides(&row.request, &a.overrides)?;
                out.push(row);
            }
        }
        return Ok(out);
    }
    for path in &a.config {
        let req = load_request(path, &a.overrides)?;
        if a.strikes.is_empty() {
            out.push(TableRequest { request: req, benchmark: None });
        } else {
            for &strike in &a.strikes {
                out.push(TableRequest { request: PricingRequest { strike, ..req.clone() }, benchmark: None });
            }
        }
    }
    Ok(out)
}

fn run_table(a: TableArgs) -> Result<u8> {
    let requests = table_requests(&a)?;
    if requests.is_empty() {
        return Err(Error::Config("nothing to price: give --benchmark-table or at least one --config".into()));
    }
    let rows = price_table(&requests)?;
    emit(a.output.as_deref(), &table_csv(&rows, !a.omit_timing))?;
    let mut failed = 0;
    for row in &rows {
        if let Err(msg) = &row.result {
            failed += 1;
            eprintln!("row K={} n={}: {msg}", row.strike, row.monitoring.label());
        }
    }
    Ok(if failed > 0 { 2 } else { 0 })
}

fn run_validate(a: ValidateArgs) -> Result<u8> {
    let only = a.only.iter().map(|s| s.parse::<Property>()).collect::<Result<Vec<_>>>()?;
    if a.cases == 0 {
        return Err(Error::Config("--cases must be at least 1".into()));
    }
    let cfg = SuiteConfig { seed: a.seed, cases: a.cases, first_case: a.first_case, mc_paths: a.mc_paths, only };
    let report = if a.inject_broken_generator {
        validate::run_suite_with(&cfg, broken_generator)
    } else {
        validate::run_suite(&cfg)
    };
    emit(None, &report.text())?;
    if let Some(path) = &a.csv {
        std::fs::write(path, report.csv())?;
    }
    Ok(if report.all_passed() { 0 } else { 2 })
}

fn run_sweep(a: SweepArgs) -> Result<u8> {
    let req = load_request(&a.config, &a.overrides)?;
    let mut csv = String::new();
    if a.n_states.is_empty() {
        let sweep = convergence_sweep(&req, &a.n)?;
        csv.push_str("n,price,gap_to_continuous\n");
        for (&(n, price), gap) in sweep.rows.iter().zip(&sweep.gaps) {
            csv.push_str(&format!("{n},{price:.8},{gap:.3e}\n"));
        }
        csv.push_str(&format!("{},{:.8},0\n", MonitoringSpec::Continuous.label(), sweep.continuous));
        if !sweep.monotone {
            eprintln!("note: discrete prices do not approach the continuous price monotonically");
        }
    } else {
        csv.push_str("n_states,price,change_pct\n");
        let pricer = Pricer::new();
        let mut previous: Option<f64> = None;
        for &n_states in &a.n_states {
            let mut r = req.clone();
            r.grid.n_states = n_states;
            let price = pricer.price(&r)?.price;
            let change = previous.map_or(String::new(), |p| format!("{:.4}", 100.0 * (price - p) / p));
            csv.push_str(&format!("{n_states},{price:.8},{change}\n"));
            previous = Some(price);
        }
    }
    emit(a.output.as_deref(), &csv)?;
    Ok(0)
}
