//! Structured outcomes of verifications.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// One compared pair. `pass` holds exactly when `margin >= -tol`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub tol: f64,
}

impl Check {
    /// Inequality `lhs <= rhs`, margin `rhs - lhs`.
    pub fn leq(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            label: label.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tol,
            tol,
        }
    }

    /// Equality `lhs = rhs`, margin `-|lhs - rhs|`.
    pub fn eq(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = -(lhs - rhs).abs();
        Self {
            label: label.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tol,
            tol,
        }
    }
}

/// Tabular curve data attached to a report (emitted as CSV, not JSON).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub suite: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub version: String,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl BoundReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            params: BTreeMap::new(),
            seed: None,
            checks: Vec::new(),
            version: crate::VERSION.to_string(),
            table: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Append another report's checks, prefixing their labels.
    pub fn absorb(&mut self, prefix: &str, other: BoundReport) {
        for mut c in other.checks {
            c.label = format!("{prefix}{}", c.label);
            self.checks.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Smallest margin over all checks (`+inf` when empty).
    pub fn worst_margin(&self) -> f64 {
        self.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }
}
