mod commands;
mod fiber;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hodge_cstar::config::{ReportFormat, RunConfig};
use hodge_cstar::report::{all_pass, render_checks, to_json, Check, SCHEMA_VERSION};
use hodge_cstar::suite;
use serde::Serialize;

use commands::{Outcome, TorusSuite};

/// Verifies Hodge-theoretic identities for complexes of Hilbert modules over
/// finite-dimensional C*-algebras.
///
/// Exit status: 0 when every check passes, 1 when an identity fails, 2 when
/// the input or configuration cannot be used.
#[derive(Parser)]
#[command(name = "hodge-cstar", version)]
struct Cli {
    /// Residual tolerance for identity checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Relative singular-value cutoff for rank decisions and pseudoinverses.
    #[arg(long, global = true, default_value_t = 1e-10)]
    cutoff: f64,
    /// Seed for the random suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Load a complex file and check D² = 0.
    CheckComplex { file: PathBuf },
    /// Harmonic and cohomology dimensions with the parametrix identities.
    Hodge {
        file: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Parametrix residuals at one degree, plus the chain-map identities.
    Parametrix {
        file: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Scan a file of symbol samples for ellipticity.
    Ellipticity { file: PathBuf },
    /// De Rham model on the flat torus with band-limited sections.
    TorusDemo {
        /// Torus dimension.
        #[arg(long)]
        n: usize,
        /// Fourier band: modes with every |q_j| ≤ band.
        #[arg(long)]
        band: usize,
        /// Free fiber module as `[RANK*](b1,...)`, e.g. `(2)` or `2*(1,2)`.
        #[arg(long)]
        fiber: String,
        #[arg(long, value_enum, default_value_t = TorusSuite::Derham)]
        suite: TorusSuite,
        /// Sobolev order for the embedding suite (default: smallest order
        /// admitting first derivatives).
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i32>,
    },
    /// Every random suite with the default instance counts.
    Suite,
}

#[derive(Serialize)]
struct ConfigEcho {
    tolerance: f64,
    svd_cutoff: f64,
    seed: u64,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: ConfigEcho,
    details: &'a T,
    checks: &'a [Check],
    passed: bool,
}

fn emit<T: Serialize>(name: &str, cfg: &RunConfig, out: Outcome<T>) -> Result<bool, hodge_cstar::Error> {
    let passed = all_pass(&out.checks);
    match cfg.format {
        ReportFormat::Text => {
            for line in &out.summary {
                println!("{line}");
            }
            print!("{}", render_checks(&out.checks));
            println!("result: {}", if passed { "PASS" } else { "FAIL" });
        }
        ReportFormat::Json => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                command: name,
                config: ConfigEcho {
                    tolerance: cfg.tolerance,
                    svd_cutoff: cfg.svd_cutoff,
                    seed: cfg.seed,
                },
                details: &out.details,
                checks: &out.checks,
                passed,
            };
            println!("{}", to_json(&report)?);
        }
    }
    Ok(passed)
}

fn run(cli: Cli, cfg: &RunConfig) -> Result<bool, hodge_cstar::Error> {
    match cli.command {
        Command::CheckComplex { file } => emit("check-complex", cfg, commands::check_complex(&file, cfg)?),
        Command::Hodge { file, degree } => emit("hodge", cfg, commands::hodge(&file, degree, cfg)?),
        Command::Parametrix { file, degree } => emit("parametrix", cfg, commands::parametrix(&file, degree, cfg)?),
        Command::Ellipticity { file } => emit("ellipticity", cfg, commands::ellipticity(&file, cfg)?),
        Command::TorusDemo {
            n,
            band,
            fiber,
            suite,
            order,
        } => {
            let fiber = fiber::parse_fiber(&fiber)?;
            emit("torus-demo", cfg, commands::torus_demo(n, band, fiber, suite, order, cfg)?)
        }
        Command::Suite => {
            let full = suite::run_all(cfg)?;
            match cfg.format {
                ReportFormat::Text => {
                    for c in &full.criteria {
                        let tag = if c.passed { "PASS" } else { "FAIL" };
                        println!("criterion {} {tag}: {}", c.number, c.name);
                    }
                    println!("result: {}", if full.passed { "PASS" } else { "FAIL" });
                }
                ReportFormat::Json => println!("{}", to_json(&full)?),
            }
            Ok(full.passed)
        }
    }
}

fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var("HODGE_CSTAR_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("HODGE_CSTAR_THREADS must be a positive integer, got '{v}'")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_cap() {
        Ok(Some(n)) => {
            hodge_cstar::par::limit_threads(n);
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    }
    let cfg = RunConfig {
        tolerance: cli.tol,
        svd_cutoff: cli.cutoff,
        seed: cli.seed,
        format: match cli.format {
            Format::Text => ReportFormat::Text,
            Format::Json => ReportFormat::Json,
        },
        ..RunConfig::default()
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
