//! `verify`: batch runner for the claim suites.

mod suites;

use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;
use twoadic::fermat::FermatError;
use twoadic::report::{ClaimRecord, Report};

const DEFAULT_CHIS: [i64; 7] = [3, 5, 7, 9, 11, 13, 15];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    Params(#[from] FermatError),
    #[error("cannot write {0}: {1}")]
    Io(String, #[source] io::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Parser, Debug)]
#[command(name = "verify", about = "Exact checks of digit-sum, series, Galois and valuation claims")]
struct Cli {
    #[command(subcommand)]
    suite: Suite,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "VERIFY_JOBS")]
    jobs: Option<usize>,

    /// Write the full JSON report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Branch {
    /// Exponent n; without it, every valid case with 3 <= n <= 5.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// Digit-sum bounds for all l up to --max.
    Base2 {
        #[arg(long, default_value_t = 4096)]
        max: u64,
    },
    /// Valuations and congruences of the series chain.
    Series {
        #[command(flatten)]
        branch: Branch,
        #[arg(long, default_value_t = 32)]
        order: usize,
    },
    /// Congruence between the disc center and its Galois image.
    Galois {
        #[command(flatten)]
        branch: Branch,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        chi: Vec<i64>,
    },
    /// Closed form of v(β) against the z-valuations.
    Beta {
        #[command(flatten)]
        branch: Branch,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        chi: Vec<i64>,
        #[arg(long, default_value_t = 32)]
        order: usize,
    },
    /// Balance of V_2 and v(β) on seeded random triples.
    Transition {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Largest denominator exponent.
        #[arg(long, default_value_t = 6)]
        max: u32,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        chi: Vec<i64>,
    },
    /// Kernel of the additivity system at level N.
    Czero {
        #[arg(long, default_value_t = 5)]
        level: u32,
        #[arg(long, value_name = "PATH")]
        matrix_dump: Option<PathBuf>,
    },
}

fn chis_or_default(chi: &[i64]) -> Result<Vec<i64>, ConfigError> {
    let chis = if chi.is_empty() { DEFAULT_CHIS.to_vec() } else { chi.to_vec() };
    suites::check_chis(&chis)?;
    Ok(chis)
}

fn check_order(order: usize) -> Result<(), ConfigError> {
    if order < 3 {
        return Err(ConfigError::Range(format!("--order {order} is below 3")));
    }
    Ok(())
}

fn run(suite: &Suite) -> Result<(&'static str, Value, Vec<ClaimRecord>), ConfigError> {
    Ok(match suite {
        Suite::Base2 { max } => ("base2", json!({ "max": max }), suites::base2(*max)),
        Suite::Series { branch, order } => {
            check_order(*order)?;
            let cases = suites::branch_cases(branch.n, branch.a, branch.b)?;
            let config = json!({ "n": branch.n, "a": branch.a, "b": branch.b, "order": order, "cases": cases.len() });
            ("series", config, suites::series(&cases, *order))
        }
        Suite::Galois { branch, chi } => {
            let chis = chis_or_default(chi)?;
            let cases = suites::branch_cases(branch.n, branch.a, branch.b)?;
            let config = json!({ "n": branch.n, "a": branch.a, "b": branch.b, "chi": chis, "cases": cases.len() });
            ("galois", config, suites::galois(&cases, &chis))
        }
        Suite::Beta { branch, chi, order } => {
            let chis = chis_or_default(chi)?;
            let cases = suites::branch_cases(branch.n, branch.a, branch.b)?;
            let config = json!({ "n": branch.n, "a": branch.a, "b": branch.b, "chi": chis, "order": order });
            ("beta", config, suites::beta(&cases, &chis, *order)?)
        }
        Suite::Transition { seed, samples, max, chi } => {
            let chis = chis_or_default(chi)?;
            if !(2..=20).contains(max) {
                return Err(ConfigError::Range(format!("--max {max} must lie in [2, 20]")));
            }
            let config = json!({ "seed": seed, "samples": samples, "max": max, "chi": chis });
            ("transition", config, suites::transition(*seed, *samples, *max, &chis))
        }
        Suite::Czero { level, matrix_dump } => {
            if !(1..=10).contains(level) {
                return Err(ConfigError::Range(format!("--level {level} must lie in [1, 10]")));
            }
            let config = json!({ "level": level, "matrix_dump": matrix_dump });
            ("czero", config, suites::czero(*level, matrix_dump.as_deref())?)
        }
    })
}

fn print_summary(report: &Report) {
    let verbose = report.claims.len() <= 100;
    for c in &report.claims {
        if verbose || !c.passed() {
            let tag = if c.passed() { "pass" } else { "FAIL" };
            println!("{tag} {} {}", c.id, c.params);
            if !c.passed() {
                println!("     {}", c.paper_ref);
                println!("     {}", c.witness);
            }
        }
    }
    let failed = report.failures().count();
    println!(
        "{}: {} claims, {} passed, {failed} failed ({} ms)",
        report.suite,
        report.claims.len(),
        report.claims.len() - failed,
        report.elapsed_ms
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, ConfigError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(ConfigError::Range("--jobs must be positive".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| ConfigError::Pool(e.to_string()))?;
    let started = Instant::now();
    let (suite, config, claims) = pool.install(|| run(&cli.suite))?;
    let report = Report { suite: suite.to_string(), config, claims, elapsed_ms: started.elapsed().as_millis() };
    print_summary(&report);
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize");
        fs::write(path, text).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
    }
    Ok(report.passed())
}
