use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use csent::verify::{run_suite, Suite, VerifyConfig};
use csent_cli::exit;
use csent_cli::gen::{generate, parse_params};
use csent_cli::report::{compute, Measure, RunConfig};
use csent_cli::statefile::{load, violated_invariant, LoadError};

#[derive(Parser)]
#[command(name = "csent", version, about = "Discord-based entanglement quantifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restarts per optimization (default: per-quantifier).
    #[arg(long)]
    restarts: Option<usize>,
    /// Relative objective decrease that stops a local search.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Halve default restarts; not meant for acceptance runs.
    #[arg(long)]
    fast: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a measure on a state file.
    Compute {
        measure: String,
        file: PathBuf,
        /// Second state for fidelity-pair.
        #[arg(long)]
        other: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run a property suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        restarts: Option<usize>,
        /// Halve sample counts and restarts; tolerances are unchanged.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write a state file for a named family.
    Gen {
        family: String,
        out: PathBuf,
        /// Family parameter as key=value (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn load_or_exit(path: &PathBuf) -> Result<csent::MultipartiteState, ExitCode> {
    load(path).map_err(|e| match e {
        LoadError::Parse(_) => fail(exit::INPUT, e),
        LoadError::Validation { .. } => fail(exit::VALIDATION, e),
    })
}

fn cmd_compute(measure: &str, file: &PathBuf, other: Option<&PathBuf>, run: &RunArgs, json: bool) -> ExitCode {
    let Some(measure) = Measure::parse(measure) else {
        let names: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
        return fail(exit::INPUT, format!("unknown measure `{measure}` (expected one of {})", names.join(", ")));
    };
    let config = RunConfig {
        seed: run.seed,
        restarts: run.restarts,
        tol: run.tol,
        fast_mode: run.fast,
    };
    if let Err(e) = config.validate() {
        return fail(exit::INPUT, e);
    }
    let rho = match load_or_exit(file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let sigma = match other.map(load_or_exit).transpose() {
        Ok(s) => s,
        Err(c) => return c,
    };
    let start = Instant::now();
    match compute(measure, &rho, sigma.as_ref(), &config) {
        Ok(r) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            } else {
                print!("{}", r.to_text());
            }
            eprintln!("runtime_seconds {:.3}", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) if violated_invariant(&e).is_some() => fail(exit::VALIDATION, e),
        Err(e) => fail(exit::INPUT, e),
    }
}

fn cmd_verify(suite: &str, config: VerifyConfig, json: bool) -> ExitCode {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => return fail(exit::INPUT, e),
    };
    if config.restarts == Some(0) {
        return fail(exit::INPUT, "restarts must be at least 1");
    }
    let start = Instant::now();
    let report = match run_suite(suite, &config) {
        Ok(r) => r,
        Err(e) => return fail(exit::ASSERTION, e),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&csent_cli::suite_json(&report)).expect("report serializes"));
    } else {
        println!("{report}");
    }
    eprintln!("runtime_seconds {:.3}", start.elapsed().as_secs_f64());
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(exit::ASSERTION as u8)
    }
}

fn cmd_gen(family: &str, out: &PathBuf, params: &[String], seed: u64) -> ExitCode {
    let file = match parse_params(params).and_then(|p| generate(family, p, seed)) {
        Ok(f) => f,
        Err(e) => return fail(exit::INPUT, e),
    };
    match std::fs::write(out, file.to_text()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(exit::INPUT, format!("{}: {e}", out.display())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Compute {
            measure,
            file,
            other,
            run,
            json,
        } => cmd_compute(measure, file, other.as_ref(), run, *json),
        Command::Verify {
            suite,
            seed,
            restarts,
            fast,
            json,
        } => cmd_verify(
            suite,
            VerifyConfig {
                seed: *seed,
                restarts: *restarts,
                fast: *fast,
            },
            *json,
        ),
        Command::Gen {
            family,
            out,
            params,
            seed,
        } => cmd_gen(family, out, params, *seed),
    }
}
