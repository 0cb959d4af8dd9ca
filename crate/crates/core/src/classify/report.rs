use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub residual: String,
}

/// Ordered step results. After the first failure later steps are skipped
/// unless the report was created with [`Report::keep_going`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub steps: Vec<Step>,
    #[serde(skip)]
    keep_going: bool,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn keep_going() -> Self {
        Report {
            steps: Vec::new(),
            keep_going: true,
        }
    }

    pub fn passed(&self) -> bool {
        !self.steps.is_empty() && self.steps.iter().all(|s| s.status == Status::Pass)
    }

    pub fn failed_step(&self) -> Option<&Step> {
        self.steps.iter().find(|s| s.status == Status::Fail)
    }

    /// Runs `f` unless an earlier step failed. `f` returns the residual,
    /// which must be the zero expression for the step to pass.
    pub fn step(&mut self, id: &str, anchor: &str, f: impl FnOnce() -> Result<Expr>) -> bool {
        self.check(id, anchor, || {
            let r = f()?;
            Ok((r.is_zero(), r.to_string()))
        })
    }

    /// Like [`Report::step`] for checks that produce a verdict and a detail line.
    pub fn check(
        &mut self,
        id: &str,
        anchor: &str,
        f: impl FnOnce() -> Result<(bool, String)>,
    ) -> bool {
        let (status, residual) = if self.failed_step().is_some() && !self.keep_going {
            (Status::Skipped, String::new())
        } else {
            match f() {
                Ok((true, detail)) => (Status::Pass, detail),
                Ok((false, detail)) => (Status::Fail, detail),
                Err(e) => (Status::Fail, format!("error: {e}")),
            }
        };
        self.steps.push(Step {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status,
            residual,
        });
        status == Status::Pass
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.steps.iter().map(|s| s.id.len()).max().unwrap_or(0);
        for s in &self.steps {
            let tag = match s.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            write!(f, "{tag}  {:<w$}  {}", s.id, s.anchor)?;
            if s.status == Status::Fail {
                write!(f, "\n      residual: {}", s.residual)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
