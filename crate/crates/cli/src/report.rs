//! Report records and their text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fdcstar::Tol;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One verified identity: its name, the identity it checks, and the outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `residual` is within `tol.eq`.
    pub fn residual(name: &str, anchor: &str, residual: f64, tol: &Tol) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status: if tol.ok(residual) {
                Status::Pass
            } else {
                Status::Fail
            },
            residual: Some(residual),
            detail: None,
        }
    }

    /// A pass/fail outcome without a residual; an empty detail is dropped.
    pub fn flag(name: &str, anchor: &str, pass: bool, detail: impl Into<String>) -> Self {
        let detail: String = detail.into();
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            residual: None,
            detail: (!detail.is_empty()).then_some(detail),
        }
    }

    pub fn error(name: &str, anchor: &str, message: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Error,
            residual: None,
            detail: Some(message.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub index: usize,
    pub task: String,
    pub subject: String,
    pub status: Status,
    pub checks: Vec<Check>,
    /// Computed quantities worth reporting (dimensions, indices, depth).
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_s: Option<f64>,
}

impl TaskRecord {
    pub fn new(
        index: usize,
        task: &str,
        subject: &str,
        checks: Vec<Check>,
        values: BTreeMap<String, Value>,
    ) -> Self {
        let status = overall(checks.iter().map(|c| c.status));
        TaskRecord {
            index,
            task: task.into(),
            subject: subject.into(),
            status,
            checks,
            values,
            elapsed_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the spec file bytes.
    pub input_digest: String,
    pub seed: u64,
    pub tolerance: f64,
    pub tasks: Vec<TaskRecord>,
    pub status: Status,
}

/// Error dominates failure, which dominates pass; an empty list passes.
fn overall(statuses: impl Iterator<Item = Status>) -> Status {
    statuses.fold(Status::Pass, |acc, s| match (acc, s) {
        (Status::Error, _) | (_, Status::Error) => Status::Error,
        (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
        _ => Status::Pass,
    })
}

impl Report {
    pub fn new(input_digest: String, seed: u64, tolerance: f64, tasks: Vec<TaskRecord>) -> Self {
        let status = overall(tasks.iter().map(|t| t.status));
        Report {
            tool: env!("CARGO_BIN_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_digest,
            seed,
            tolerance,
            tasks,
            status,
        }
    }

    pub fn passes(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.tool, self.version);
        let _ = writeln!(out, "input sha256 {}", self.input_digest);
        let _ = writeln!(out, "seed {} tolerance {:e}", self.seed, self.tolerance);
        for t in &self.tasks {
            let _ = write!(
                out,
                "\n[{}] {} {}: {}",
                t.index,
                t.task,
                t.subject,
                t.status.as_str()
            );
            if let Some(e) = t.elapsed_s {
                let _ = write!(out, " ({e:.3} s)");
            }
            out.push('\n');
            for c in &t.checks {
                let _ = write!(out, "  {:<5} {}", c.status.as_str(), c.name);
                if let Some(r) = c.residual {
                    let _ = write!(out, "  residual {r:.3e}");
                }
                let _ = write!(out, "  [{}]", c.anchor);
                if let Some(d) = &c.detail {
                    let _ = write!(out, "  {d}");
                }
                out.push('\n');
            }
            for (k, v) in &t.values {
                let _ = writeln!(out, "  {k} = {v}");
            }
        }
        let _ = writeln!(out, "\noverall: {}", self.status.as_str());
        out
    }
}
