use serde::{Deserialize, Serialize};

/// Outcome of a single named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Warn,
}

/// One verified identity (or recorded observation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    #[serde(default)]
    pub detail: String,
}

/// Ordered list of named residual checks with an overall verdict.
///
/// The verdict is `pass` iff no check has status `fail`; `skip` and `warn`
/// entries do not affect it. Check order is fixed by the pipeline, so reports
/// are byte-identical across runs on identical input.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport { checks: Vec::new() }
    }

    /// Record a residual against a tolerance.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> &mut Self {
        let status = if residual.is_finite() && residual <= tol {
            Status::Pass
        } else {
            Status::Fail
        };
        self.checks.push(Check {
            name: name.into(),
            status,
            residual,
            detail: String::new(),
        });
        self
    }

    /// Record a residual, downgrading a failure to a warning (used when the
    /// relevant Gram matrix is too badly conditioned to trust the residual).
    pub fn check_degradable(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        tol: f64,
        degraded: bool,
    ) -> &mut Self {
        self.check(name, residual, tol);
        if degraded {
            if let Some(last) = self.checks.last_mut() {
                if last.status == Status::Fail {
                    last.status = Status::Warn;
                    last.detail = "ill-conditioned Gram matrix; downgraded to warning".into();
                }
            }
        }
        self
    }

    /// Record an informational entry that always passes.
    pub fn info(&mut self, name: impl Into<String>, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            status: Status::Pass,
            residual: 0.0,
            detail: detail.into(),
        });
        self
    }

    /// Record a skipped check with the reason.
    pub fn skip(&mut self, name: impl Into<String>, reason: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            status: Status::Skip,
            residual: 0.0,
            detail: reason.into(),
        });
        self
    }

    /// Record a hard failure with a message (used when a construction errors).
    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            status: Status::Fail,
            residual: f64::INFINITY,
            detail: detail.into(),
        });
        self
    }

    /// Attach a detail string to the most recently recorded check.
    pub fn with_detail(&mut self, detail: impl Into<String>) -> &mut Self {
        if let Some(last) = self.checks.last_mut() {
            last.detail = detail.into();
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// Name of the first failing check, if any.
    pub fn first_failure(&self) -> Option<&str> {
        self.checks
            .iter()
            .find(|c| c.status == Status::Fail)
            .map(|c| c.name.as_str())
    }

    /// Largest finite residual among non-skipped checks.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.status != Status::Skip && c.residual.is_finite())
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    /// Append all checks of another report, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    /// Render the spec'd report JSON document `{verdict, tol, checks}`.
    pub fn to_json(&self, tol: f64) -> serde_json::Value {
        serde_json::json!({
            "verdict": if self.passed() { "pass" } else { "fail" },
            "tol": tol,
            "checks": self.checks,
        })
    }

    /// Plain-text rendering, one line per check.
    pub fn to_text(&self, tol: f64) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
                Status::Warn => "WARN",
            };
            out.push_str(&format!("{status:4}  {:55} {:.3e}", c.name, c.residual));
            if !c.detail.is_empty() {
                out.push_str(&format!("  [{}]", c.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "verdict: {} ({} checks, tol {:.1e})\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            tol
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_ignores_skips_and_warns() {
        let mut r = VerificationReport::new();
        r.check("a", 1e-12, 1e-9);
        r.skip("b", "not applicable");
        r.check_degradable("c", 1.0, 1e-9, true);
        assert!(r.passed());
        r.check("d", 1.0, 1e-9);
        assert!(!r.passed());
        assert_eq!(r.first_failure(), Some("d"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = VerificationReport::new();
        r.check("x", 0.0, 1e-9).with_detail("ok");
        let v = r.to_json(1e-9);
        assert_eq!(v["verdict"], "pass");
        let back: Vec<Check> = serde_json::from_value(v["checks"].clone()).unwrap();
        assert_eq!(back[0].name, "x");
    }
}
