//! Library side of the `csent` command: state files, generators and reports.

pub mod gen;
pub mod report;
pub mod statefile;

use csent::verify::SuiteReport;
use serde::Serialize;

/// Stable process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const VALIDATION: i32 = 3;
}

#[derive(Debug, Serialize)]
pub struct CheckJson<'a> {
    pub name: &'a str,
    pub trials: usize,
    pub failures: usize,
    pub worst_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SuiteJson<'a> {
    pub schema_version: u32,
    pub suite: &'static str,
    pub seed: u64,
    pub restarts: Option<usize>,
    pub fast_mode: bool,
    pub pass: bool,
    pub checks: Vec<CheckJson<'a>>,
    pub values: Vec<(&'a str, f64)>,
}

pub fn suite_json(r: &SuiteReport) -> SuiteJson<'_> {
    SuiteJson {
        schema_version: report::REPORT_SCHEMA_VERSION,
        suite: r.suite.name(),
        seed: r.config.seed,
        restarts: r.config.restarts,
        fast_mode: r.config.fast,
        pass: r.pass(),
        checks: r
            .checks
            .iter()
            .map(|c| CheckJson {
                name: &c.name,
                trials: c.trials,
                failures: c.failures,
                worst_residual: c.worst_residual,
                tol: c.tol,
                pass: c.pass(),
            })
            .collect(),
        values: r.values.iter().map(|(n, v)| (n.as_str(), *v)).collect(),
    }
}
