//! Verification reports and their comparison.

use serde::{Deserialize, Serialize};

use crate::error::{FinjetError, Result};

pub const SCHEMA: &str = "finjet-report/1";

/// Relative growth of a residual counted as a regression.
pub const REGRESSION_FACTOR: f64 = 1.1;
/// Residuals below this are treated as equal.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    /// The statement the check traces back to.
    pub anchor: String,
    pub samples: usize,
    /// `null` when the check did not run or produced a non-finite value.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(suite: &str, check: impl Into<String>, anchor: &str, samples: usize, residual: f64, tolerance: f64) -> Self {
        // NaN fails
        let pass = residual <= tolerance;
        CheckRecord {
            suite: suite.into(),
            check: check.into(),
            anchor: anchor.into(),
            samples,
            max_residual: residual.is_finite().then_some(residual),
            tolerance,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    pub fn not_applicable(suite: &str, anchor: &str, tolerance: f64, why: &str) -> Self {
        CheckRecord {
            suite: suite.into(),
            check: "precondition".into(),
            anchor: anchor.into(),
            samples: 0,
            max_residual: None,
            tolerance,
            pass: true,
            status: Status::NotApplicable,
            note: Some(why.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn key(&self) -> (&str, &str) {
        (&self.suite, &self.check)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub engine_version: String,
    pub scenario_digest: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub timestamp: u64,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(scenario_digest: String, seed: u64, checks: Vec<CheckRecord>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            schema: SCHEMA.into(),
            engine_version: env!("CARGO_PKG_VERSION").into(),
            scenario_digest,
            seed,
            timestamp,
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let r: Report = serde_json::from_str(text).map_err(|e| FinjetError::Config(e.to_string()))?;
        if r.schema != SCHEMA {
            return Err(FinjetError::Config(format!("unsupported report schema `{}`", r.schema)));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffLine {
    Improved { suite: String, check: String, before: f64, after: f64 },
    Regressed { suite: String, check: String, before: Option<f64>, after: Option<f64> },
    Removed { suite: String, check: String },
    Added { suite: String, check: String },
}

impl std::fmt::Display for DiffLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: &Option<f64>| v.map_or("null".to_string(), |v| format!("{v:e}"));
        match self {
            DiffLine::Improved { suite, check, before, after } => {
                write!(f, "improved  {suite}/{check}: {before:e} -> {after:e}")
            }
            DiffLine::Regressed { suite, check, before, after } => {
                write!(f, "REGRESSED {suite}/{check}: {} -> {}", show(before), show(after))
            }
            DiffLine::Removed { suite, check } => write!(f, "removed   {suite}/{check}"),
            DiffLine::Added { suite, check } => write!(f, "added     {suite}/{check}"),
        }
    }
}

impl DiffLine {
    pub fn is_regression(&self) -> bool {
        matches!(self, DiffLine::Regressed { .. })
    }
}

/// Compares `b` against the baseline `a`. Fails with a config error when the
/// reports come from different scenarios.
pub fn diff_reports(a: &Report, b: &Report) -> Result<Vec<DiffLine>> {
    if a.scenario_digest != b.scenario_digest {
        return Err(FinjetError::Config(format!(
            "scenario digests differ: {} vs {}",
            a.scenario_digest, b.scenario_digest
        )));
    }
    let mut out = Vec::new();
    for ca in &a.checks {
        let Some(cb) = b.checks.iter().find(|c| c.key() == ca.key()) else {
            out.push(DiffLine::Removed { suite: ca.suite.clone(), check: ca.check.clone() });
            continue;
        };
        let (suite, check) = (ca.suite.clone(), ca.check.clone());
        match (ca.max_residual, cb.max_residual) {
            (Some(ra), Some(rb)) => {
                let (fa, fb) = (ra.max(RESIDUAL_FLOOR), rb.max(RESIDUAL_FLOOR));
                if fb > REGRESSION_FACTOR * fa || (ca.pass && !cb.pass) {
                    out.push(DiffLine::Regressed { suite, check, before: Some(ra), after: Some(rb) });
                } else if fb < fa {
                    out.push(DiffLine::Improved { suite, check, before: ra, after: rb });
                }
            }
            (ra, rb) if ca.pass && !cb.pass || ra.is_some() && rb.is_none() && cb.status != Status::NotApplicable => {
                out.push(DiffLine::Regressed { suite, check, before: ra, after: rb });
            }
            _ => {}
        }
    }
    for cb in &b.checks {
        if !a.checks.iter().any(|c| c.key() == cb.key()) {
            out.push(DiffLine::Added { suite: cb.suite.clone(), check: cb.check.clone() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(residuals: &[f64]) -> Report {
        let checks = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| CheckRecord::new("cocycle", format!("c{i}"), "cocycle identity", 4, *r, 1e-6))
            .collect();
        Report::new("abc".into(), 7, checks)
    }

    #[test]
    fn pass_flag_follows_tolerance() {
        assert!(CheckRecord::new("s", "c", "a", 1, 1e-6, 1e-6).pass);
        assert!(!CheckRecord::new("s", "c", "a", 1, 2e-6, 1e-6).pass);
        let nan = CheckRecord::new("s", "c", "a", 1, f64::NAN, 1e-6);
        assert!(!nan.pass);
        assert_eq!(nan.max_residual, None);
    }

    #[test]
    fn json_round_trip() {
        let r = report(&[1e-9, 0.1]);
        let text = r.to_json();
        assert!(text.contains("\"schema\": \"finjet-report/1\""));
        assert!(text.contains("\"status\": \"fail\""));
        assert_eq!(Report::from_json(&text).unwrap(), r);
        let na = CheckRecord::not_applicable("conformal-vanishing", "a", 1e-7, "model is not flat");
        assert!(serde_json::to_string(&na).unwrap().contains("\"not-applicable\""));
    }

    #[test]
    fn identical_reports_have_an_empty_diff() {
        let r = report(&[1e-9, 2e-8]);
        assert!(diff_reports(&r, &r).unwrap().is_empty());
    }

    #[test]
    fn improvement_and_regression() {
        let a = report(&[1e-9, 1e-9]);
        let b = report(&[1e-10, 1e-8]);
        let d = diff_reports(&a, &b).unwrap();
        assert_eq!(d.len(), 2);
        assert!(matches!(d[0], DiffLine::Improved { .. }));
        assert!(d[1].is_regression());
        // within 10 percent
        let c = report(&[1.05e-9, 1e-9]);
        assert!(diff_reports(&a, &c).unwrap().is_empty());
    }

    #[test]
    fn round_off_near_zero_is_not_a_regression() {
        let a = report(&[0.0]);
        let b = report(&[3e-15]);
        assert!(diff_reports(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn digest_mismatch_is_a_config_error() {
        let a = report(&[1e-9]);
        let mut b = a.clone();
        b.scenario_digest = "other".into();
        assert_eq!(diff_reports(&a, &b).unwrap_err().exit_code(), 2);
    }
}
