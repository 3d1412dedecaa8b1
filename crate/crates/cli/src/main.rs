//! `auction-lab`: command-line front end for the auction laboratory.
//!
//! Every subcommand is a thin adapter over the library: instances are
//! parsed here, numbers are computed in the library, and results leave as
//! CSV. A single `--seed` governs all randomness (the `AUCTION_LAB_SEED`
//! environment variable fills in when the flag is absent), so every run
//! is reproducible, and worker counts never change reported values.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing suite, 2 on
//! any validation or usage error.

mod instance;
mod report;

use anyhow::{bail, Context, Result};
use auction_lab::analytics;
use auction_lab::auctions::{self, AuctionSpec};
use auction_lab::benchmarks;
use auction_lab::harness::{self, EstimatorKind};
use auction_lab::online::{
    online_vs_benchmark, BidIndependentPricer, OnlineBenchmark, RspePricer, SecondBidPricer,
};
use auction_lab::{BidProfile, EnvironmentSpec, RandomSource};
use clap::{Parser, Subcommand, ValueEnum};
use report::{num, Table};
use std::path::PathBuf;
use std::process::ExitCode;

/// Seed used when neither `--seed` nor the environment variable is given.
const DEFAULT_SEED: u64 = 1729;

/// Environment variable consulted when `--seed` is absent.
const SEED_ENV_VAR: &str = "AUCTION_LAB_SEED";

#[derive(Parser)]
#[command(
    name = "auction-lab",
    version,
    about = "Prior-free auction laboratory: benchmarks, mechanisms, ratio formulas, verification",
    propagate_version = true
)]
struct Cli {
    /// Master seed for all randomness. Defaults to AUCTION_LAB_SEED when
    /// set, then to 1729.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every benchmark value for an instance file.
    Bench {
        /// Instance JSON: {"bids": [...], "environment": {"type": ...}}.
        #[arg(long)]
        instance: PathBuf,
        /// Output CSV path; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Closed-form ratio sequences for n = 2..=max-n.
    Ratios {
        #[arg(long, default_value_t = 10)]
        max_n: u64,
        /// Print exact rational values where the exact path exists.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo revenue of an auction on an instance.
    Simulate {
        #[arg(long, value_enum)]
        auction: AuctionKind,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Units for vickrey (>= 1).
        #[arg(long, default_value_t = 1)]
        units: u32,
        /// Sale price for fixed-price.
        #[arg(long)]
        price: Option<f64>,
        /// Winner cap for fixed-price.
        #[arg(long)]
        cap: Option<u32>,
        /// Sampling rate for sigma-bspe and dc651.
        #[arg(long, default_value_t = auctions::DEFAULT_SIGMA)]
        sigma: f64,
        /// Monte Carlo worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Online sampling auction against an offline benchmark.
    Online {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = PricerKind::Rspe)]
        pricer: PricerKind,
        #[arg(long, value_enum, default_value_t = BenchmarkKind::F2)]
        benchmark: BenchmarkKind,
        /// Arrival-order trials; ignored when n is small enough to
        /// enumerate every order exactly.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the property suites; exits 1 if any selected suite fails.
    Verify {
        /// Suite name, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Monte Carlo worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Report CSV path; standard output when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Computed headline ratios next to the quoted values they are
    /// advertised as, with mismatches flagged.
    Headlines {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write an instance of n equal-revenue draws.
    Sample {
        #[arg(long)]
        n: usize,
        /// Instance JSON path; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AuctionKind {
    Vickrey,
    FixedPrice,
    Rspe,
    SigmaBspe,
    Dc651,
}

#[derive(Clone, Copy, ValueEnum)]
enum PricerKind {
    Rspe,
    SecondBid,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkKind {
    F2,
    Maxv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV_VAR} must be an unsigned integer, got {raw:?}")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(err) => Err(err).context(format!("cannot read {SEED_ENV_VAR}")),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Command::Bench { instance, output } => bench(&instance, output.as_deref()),
        Command::Ratios {
            max_n,
            exact,
            output,
        } => ratios(max_n, exact, output.as_deref()),
        Command::Simulate {
            auction,
            instance,
            trials,
            units,
            price,
            cap,
            sigma,
            threads,
            output,
        } => simulate(
            auction,
            &instance,
            trials,
            units,
            price,
            cap,
            sigma,
            threads,
            seed,
            output.as_deref(),
        ),
        Command::Online {
            instance,
            pricer,
            benchmark,
            trials,
            output,
        } => online(&instance, pricer, benchmark, trials, seed, output.as_deref()),
        Command::Verify {
            suite,
            trials,
            threads,
            report,
        } => verify(&suite, trials, threads, seed, report.as_deref()),
        Command::Headlines { output } => headlines(output.as_deref()),
        Command::Sample { n, output } => sample(n, seed, output.as_deref()),
    }
}

// ============================================================================
// subcommands
// ============================================================================

fn bench(path: &std::path::Path, output: Option<&std::path::Path>) -> Result<ExitCode> {
    let (p, env) = instance::load(path)?;
    let mut table = Table::new(vec!["benchmark", "value"]);
    table.push(vec!["f2".to_string(), num(benchmarks::f2(&p))]);
    table.push(vec!["maxv".to_string(), num(benchmarks::maxv(&p))]);
    table.push(vec!["online_f".to_string(), num(benchmarks::online_f(&p))]);
    if let EnvironmentSpec::MultiUnit { units } = env {
        if units >= 2 {
            table.push(vec![
                format!("f2l[{units}]"),
                num(benchmarks::f2l(&p, units)?),
            ]);
            table.push(vec![
                format!("efo2_multiunit[{units}]"),
                num(benchmarks::efo2_multiunit(&p, units)?),
            ]);
        }
    }
    if !matches!(env, EnvironmentSpec::DownwardClosed { .. }) {
        table.push(vec![
            "efo_fixed_price".to_string(),
            num(benchmarks::efo_fixed_price(&p, &env)?),
        ]);
    }
    table.write(output)?;
    Ok(ExitCode::SUCCESS)
}

fn ratios(max_n: u64, exact: bool, output: Option<&std::path::Path>) -> Result<ExitCode> {
    if max_n < 2 {
        bail!("--max-n must be at least 2, got {max_n}");
    }
    let mut table = Table::new(vec!["n", "lambda_ell", "ratio_online_f", "tail_term"]);
    for n in 2..=max_n {
        let lambda = analytics::lambda_ell(n)?;
        let ratio = analytics::ratio_online_f(n)?;
        let tail = if n >= 3 {
            num(analytics::tail_term(n)?)
        } else {
            String::new()
        };
        let show = |r: &analytics::RatioReport| {
            if exact {
                r.exact_string().unwrap_or_else(|| num(r.value))
            } else {
                num(r.value)
            }
        };
        table.push(vec![n.to_string(), show(&lambda), show(&ratio), tail]);
    }
    table.write(output)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    auction: AuctionKind,
    path: &std::path::Path,
    trials: u64,
    units: u32,
    price: Option<f64>,
    cap: Option<u32>,
    sigma: f64,
    threads: Option<usize>,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<ExitCode> {
    if trials < 1 {
        bail!("--trials must be at least 1");
    }
    let (p, env) = instance::load(path)?;
    let spec = match auction {
        AuctionKind::Vickrey => AuctionSpec::Vickrey { units },
        AuctionKind::FixedPrice => {
            let price = price.context("fixed-price needs --price")?;
            let cap = cap.context("fixed-price needs --cap")?;
            AuctionSpec::FixedPrice { price, cap }
        }
        AuctionKind::Rspe => AuctionSpec::Rspe,
        AuctionKind::SigmaBspe => AuctionSpec::SigmaBspe { sigma },
        AuctionKind::Dc651 => AuctionSpec::Dc651 { sigma },
    };
    let workers = threads.unwrap_or_else(harness::default_workers);
    let estimate = harness::mc_revenue_with(
        &spec,
        &p,
        &env,
        trials,
        seed,
        workers,
        EstimatorKind::PlainMean,
    )?;
    // The environment's own fixed-price benchmark: F2 for unlimited
    // supply, its capped variant for two or more units, the top bid for
    // one unit.
    let benchmark = match env {
        EnvironmentSpec::MultiUnit { units } if units >= 2 => benchmarks::f2l(&p, units)?,
        EnvironmentSpec::MultiUnit { .. } => {
            benchmarks::efo_fixed_price(&p, &env)?
        }
        _ => benchmarks::f2(&p),
    };
    let mut table = Table::new(vec![
        "auction",
        "trials",
        "mean_revenue",
        "stderr",
        "f2",
        "benchmark",
        "ratio",
    ]);
    table.push(vec![
        spec.label(),
        trials.to_string(),
        num(estimate.mean),
        num(estimate.error),
        num(benchmarks::f2(&p)),
        num(benchmark),
        num(harness::empirical_ratio(benchmark, estimate.mean)),
    ]);
    table.write(output)?;
    Ok(ExitCode::SUCCESS)
}

fn online(
    path: &std::path::Path,
    pricer: PricerKind,
    benchmark: BenchmarkKind,
    trials: u64,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<ExitCode> {
    if trials < 1 {
        bail!("--trials must be at least 1");
    }
    let (p, env) = instance::load(path)?;
    if !matches!(env, EnvironmentSpec::UnlimitedSupply) {
        bail!("the online sale assumes unlimited supply; got a constrained environment");
    }
    let rspe;
    let second;
    let pricer: &dyn BidIndependentPricer = match pricer {
        PricerKind::Rspe => {
            rspe = RspePricer { seed };
            &rspe
        }
        PricerKind::SecondBid => {
            second = SecondBidPricer;
            &second
        }
    };
    let benchmark = match benchmark {
        BenchmarkKind::F2 => OnlineBenchmark::F2,
        BenchmarkKind::Maxv => OnlineBenchmark::MaxV,
    };
    let comparison = online_vs_benchmark(&p, pricer, benchmark, trials, seed);
    let mut table = Table::new(vec!["mean_revenue", "stderr", "benchmark", "ratio"]);
    table.push(vec![
        num(comparison.expected_revenue),
        num(comparison.revenue_error),
        num(comparison.benchmark_value),
        num(comparison.ratio()),
    ]);
    table.write(output)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(
    suite: &str,
    trials: u64,
    threads: Option<usize>,
    seed: u64,
    report: Option<&std::path::Path>,
) -> Result<ExitCode> {
    if trials < 1 {
        bail!("--trials must be at least 1");
    }
    let workers = threads.unwrap_or_else(harness::default_workers);
    let names: Vec<&str> = if suite == "all" {
        harness::suite_names().to_vec()
    } else {
        vec![suite]
    };
    let mut table = Table::new(vec![
        "suite", "params", "statistic", "bound", "margin", "pass",
    ]);
    let mut all_pass = true;
    for name in names {
        for row in harness::run_suite(name, trials, seed, workers)? {
            all_pass &= row.pass;
            table.push(vec![
                row.suite,
                row.params,
                num(row.statistic),
                num(row.bound),
                num(row.margin),
                row.pass.to_string(),
            ]);
        }
    }
    table.write(report)?;
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Quoted values the computed ratios are advertised under. Two of them
/// round the computed value; two disagree with it outright, and the note
/// row flags those.
const QUOTED_ENVELOPE_1000: f64 = 3.24;
const QUOTED_DOWNWARD_CLOSED: f64 = 6.5;
const QUOTED_ONLINE_LIMIT: f64 = 4.12;
const QUOTED_LAMBDA_LIMIT: f64 = 2.42;

fn headlines(output: Option<&std::path::Path>) -> Result<ExitCode> {
    let mut table = Table::new(vec!["claim", "computed", "quoted", "difference"]);
    let rows = [
        (
            "envelope-auction-ratio-1000-units",
            analytics::efo2_auction_ratio(1000)?.value,
            QUOTED_ENVELOPE_1000,
        ),
        (
            "downward-closed-ratio",
            auctions::dc651_ratio(),
            QUOTED_DOWNWARD_CLOSED,
        ),
        (
            "online-ratio-limit",
            analytics::online_ratio_limit(),
            QUOTED_ONLINE_LIMIT,
        ),
        ("lambda-limit", analytics::lambda_limit(), QUOTED_LAMBDA_LIMIT),
    ];
    for (claim, computed, quoted) in rows {
        table.push(vec![
            claim.to_string(),
            num(computed),
            num(quoted),
            num(computed - quoted),
        ]);
    }
    table.push(vec![
        "note".to_string(),
        String::new(),
        String::new(),
        "quoted 3.24 and 4.12 differ from the computed 3.426 and 4.132 beyond rounding; \
         see the ratio commands for the derivations"
            .to_string(),
    ]);
    table.write(output)?;
    Ok(ExitCode::SUCCESS)
}

fn sample(n: usize, seed: u64, output: Option<&std::path::Path>) -> Result<ExitCode> {
    if n < 1 {
        bail!("--n must be at least 1");
    }
    let mut rng = RandomSource::new(seed).rng();
    let profile: BidProfile = analytics::sample_equal_revenue(n, &mut rng);
    let json = instance::unlimited_json(profile.bids())?;
    match output {
        Some(path) => std::fs::write(path, json.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
