//! Report envelope shared by every command.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
}

/// One claim with its evidence.
///
/// `margin` is measured from the computed central value and `slack` is the
/// one-sided correction applied to it; a certified claim has `margin > slack`.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub status: Status,
    pub margin: f64,
    pub slack: f64,
    pub method: String,
}

impl Verdict {
    pub fn new(claim: impl Into<String>, margin: f64, slack: f64, method: impl Into<String>) -> Self {
        let status = if margin > slack {
            Status::Certified
        } else if margin < -slack {
            Status::Refuted
        } else {
            Status::Inconclusive
        };
        Self { claim: claim.into(), status, margin, slack, method: method.into() }
    }

    /// A claim decided by a one-sided test whose failure proves nothing.
    pub fn one_sided(claim: impl Into<String>, margin: f64, slack: f64, method: impl Into<String>) -> Self {
        let mut v = Self::new(claim, margin, slack, method);
        if v.status == Status::Refuted {
            v.status = Status::Inconclusive;
        }
        v
    }
}

/// A one-sided numeric concession.
#[derive(Debug, Clone, Serialize)]
pub struct SlackEntry {
    pub quantity: String,
    pub direction: &'static str,
    pub amount: f64,
    pub note: String,
}

impl SlackEntry {
    pub fn up(quantity: impl Into<String>, amount: f64, note: impl Into<String>) -> Self {
        Self { quantity: quantity.into(), direction: "up", amount, note: note.into() }
    }

    pub fn down(quantity: impl Into<String>, amount: f64, note: impl Into<String>) -> Self {
        Self { quantity: quantity.into(), direction: "down", amount, note: note.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub verdicts: Vec<Verdict>,
    pub wall_time_ms: u128,
    pub slack_ledger: Vec<SlackEntry>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            command: command.into(),
            inputs,
            results: Value::Null,
            verdicts: Vec::new(),
            wall_time_ms: 0,
            slack_ledger: Vec::new(),
        }
    }

    pub fn all_certified(&self) -> bool {
        self.verdicts.iter().all(|v| v.status == Status::Certified)
    }
}
