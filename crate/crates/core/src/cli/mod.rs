//! Scenario-driven front end: `eval`, `verify` and `diff`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed or a residual regressed,
//! 2 configuration or parse error, 3 numeric-domain error.

pub mod eval;
pub mod report;
pub mod sampler;
pub mod scenario;
pub mod suites;

pub use eval::{eval_quantity, format_g17, format_rows, parse_point, QUANTITIES};
pub use report::{diff_reports, CheckRecord, DiffLine, Report, Status, SCHEMA};
pub use sampler::{sample_points, SplitMix64};
pub use scenario::{load_path, load_str, Loaded, Scenario};
pub use suites::{default_tolerance, parse_suites, run_suites, SUITES};

use crate::error::Result;

/// Runs `suites` on a loaded scenario and assembles the
/// report. `seed` overrides the scenario seed.
pub fn verify(l: &Loaded, suites: &[String], seed: Option<u64>, tol: Option<f64>) -> Result<Report> {
    let names = parse_suites(suites)?;
    let seed = seed.unwrap_or(l.scenario.samples.seed);
    let checks = run_suites(l, &names, seed, tol)?;
    Ok(Report::new(l.digest.clone(), seed, checks))
}
