//! Pass/fail reports produced by every checker.
//!
//! A report names the check, lists counterexamples as rendered strings
//! (tuple, violated relation, residual), and renders to a byte-stable text
//! or machine form. Failure lists are capped; the total count is kept.

use std::fmt;

/// Cap on recorded counterexamples per report.
pub const MAX_RECORDED_FAILURES: usize = 16;

/// One violated identity: where, which relation, and the nonzero residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// Rendered argument tuple, e.g. `(e1,e1,e2)` or `(e1[1],e1[0],e1[0])`.
    pub tuple: String,
    /// Relation identifier, e.g. `C3a`, `C4`, `M4b`, `ann-skew`,
    /// `reconstruction`, `d-squared`.
    pub equation: String,
    /// Rendered residual (polynomial, element, or index expression).
    pub residual: String,
}

/// Outcome of one checker run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    /// Check name, e.g. `skew`, `filippov`, `module-axioms`.
    pub name: String,
    /// Recorded counterexamples, in canonical scan order.
    pub failures: Vec<Failure>,
    /// Total number of failures seen (may exceed `failures.len()`).
    pub failure_count: usize,
}

impl CheckReport {
    pub fn pass(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    /// Records a failure, keeping at most `MAX_RECORDED_FAILURES` entries.
    pub fn record(&mut self, tuple: String, equation: &str, residual: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(Failure {
                tuple,
                equation: equation.to_string(),
                residual,
            });
        }
    }

    /// Folds another report's failures into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        for f in other.failures {
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(f);
            }
        }
        self.failure_count += other.failure_count;
    }

    /// Single-line machine rendering per outcome: stable `key=value` fields.
    pub fn machine_lines(&self) -> Vec<String> {
        if self.passed() {
            return vec![format!("check={} status=pass", self.name)];
        }
        let mut out = Vec::new();
        for f in &self.failures {
            out.push(format!(
                "check={} status=fail tuple={} equation={} residual=\"{}\"",
                self.name, f.tuple, f.equation, f.residual
            ));
        }
        if self.failure_count > self.failures.len() {
            out.push(format!(
                "check={} status=fail omitted={}",
                self.name,
                self.failure_count - self.failures.len()
            ));
        }
        out
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "check {}: pass", self.name);
        }
        write!(
            f,
            "check {}: FAIL ({} violation(s))",
            self.name, self.failure_count
        )?;
        for fail in &self.failures {
            write!(
                f,
                "\n  at {} [{}]: residual = {}",
                fail.tuple, fail.equation, fail.residual
            )?;
        }
        if self.failure_count > self.failures.len() {
            write!(
                f,
                "\n  ... {} further violation(s) omitted",
                self.failure_count - self.failures.len()
            )?;
        }
        Ok(())
    }
}
