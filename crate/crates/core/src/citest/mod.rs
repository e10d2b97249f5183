//! Testing the listed statements against tabular data.
//!
//! Continuous statements use Fisher's z on the partial correlation when the
//! witness is a single column, and a nested-regression F test otherwise.
//! Categorical statements use a stratified chi-square test. These are
//! parametric tests; p-values from kernel-based tests will differ.

mod dataset;
mod sem;
mod stats;

use std::fmt::Write as _;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use dataset::{load_csv, read_csv, Column, ColumnKind, Dataset};
pub use sem::simulate_linear_gaussian;
pub use stats::{
    chi_square, fisher_z, fisher_z_from_r, partial_correlation, partial_f, TestOutcome, CORRELATION_EPS,
    DEFAULT_MIN_EXPECTED,
};

use crate::clmp::{list_ci, CiStatement};
use crate::error::Error;
use crate::format::join_names;
use crate::graph::CausalGraph;
use crate::order::VariableOrder;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CiTestError {
    #[error("{0}")]
    Io(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("no data rows")]
    Empty,
    #[error("row at line {line} has the wrong number of fields")]
    Ragged { line: u64 },
    #[error("column `{0}` appears twice")]
    DuplicateColumn(String),
    #[error("no column named `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` was forced continuous but is not numeric")]
    NotNumeric(String),
    #[error("column `{0}` is not continuous")]
    NotContinuous(String),
    #[error("column `{0}` is not categorical")]
    NotCategorical(String),
    #[error("statement mixes continuous and categorical columns: {0}")]
    MixedTypes(String),
    #[error("collinear columns: {}", .0.join(","))]
    Singular(Vec<String>),
    #[error("{rows} rows is too few; need at least {needed}")]
    InsufficientRows { rows: usize, needed: usize },
    #[error(transparent)]
    Graph(#[from] Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    FisherZ,
    ChiSquare,
    PartialF,
}

impl CiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CiMethod::FisherZ => "fisher_z",
            CiMethod::ChiSquare => "chi_square",
            CiMethod::PartialF => "partial_f",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Consistent,
    Violated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CiTestResult {
    pub statement: CiStatement,
    pub method: CiMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub decision: Decision,
    pub warning: Option<String>,
}

/// One statement of a report; a statement that cannot be tested keeps its
/// slot with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub statement: CiStatement,
    pub outcome: Result<CiTestResult, CiTestError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelReport {
    pub alpha: f64,
    pub entries: Vec<ReportEntry>,
}

impl ModelReport {
    pub fn tested(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_ok()).count()
    }

    pub fn consistent(&self) -> usize {
        self.results().filter(|r| r.decision == Decision::Consistent).count()
    }

    pub fn violations(&self) -> usize {
        self.results().filter(|r| r.decision == Decision::Violated).count()
    }

    pub fn errors(&self) -> usize {
        self.entries.len() - self.tested()
    }

    pub fn results(&self) -> impl Iterator<Item = &CiTestResult> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().ok())
    }

    pub fn summary(&self) -> String {
        if self.entries.is_empty() {
            return "0 CIs to test".to_string();
        }
        let mut s = format!("{} of {} consistent at alpha = {}", self.consistent(), self.tested(), self.alpha);
        if self.errors() > 0 {
            let _ = write!(s, "; {} not testable", self.errors());
        }
        s
    }

    /// One row per statement with the p-value to three decimals, then a
    /// summary line.
    pub fn render_text(&self, g: &CausalGraph) -> String {
        let rows: Vec<String> = self.entries.iter().map(|e| crate::format::format_ci(g, &e.statement)).collect();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0).max(2);
        let mut out = String::new();
        if !self.entries.is_empty() {
            let _ = writeln!(out, "{:<width$}  {:>7}  {:<10}  method", "CI", "p-value", "verdict");
        }
        for (e, row) in self.entries.iter().zip(&rows) {
            match &e.outcome {
                Ok(r) => {
                    let verdict = match r.decision {
                        Decision::Consistent => "consistent",
                        Decision::Violated => "violated",
                    };
                    let _ = write!(out, "{row:<width$}  {:>7.3}  {verdict:<10}  {}", r.p_value, r.method.as_str());
                    if let Some(w) = &r.warning {
                        let _ = write!(out, " (warning: {w})");
                    }
                    out.push('\n');
                }
                Err(err) => {
                    let _ = writeln!(out, "{row:<width$}  {:>7}  {:<10}  {err}", "-", "error");
                }
            }
        }
        out.push_str(&self.summary());
        out.push('\n');
        out
    }

    pub fn to_json(&self, g: &CausalGraph) -> serde_json::Value {
        let names = |s: &crate::nodeset::NodeSet| g.sorted_names(s);
        let results: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                let mut v = serde_json::json!({
                    "x": g.name(e.statement.x),
                    "w": names(&e.statement.w),
                    "z": names(&e.statement.z),
                });
                match &e.outcome {
                    Ok(r) => {
                        v["method"] = serde_json::json!(r.method);
                        v["statistic"] = serde_json::json!(r.statistic);
                        v["p_value"] = serde_json::json!(r.p_value);
                        v["verdict"] = serde_json::json!(r.decision);
                        if let Some(w) = &r.warning {
                            v["warning"] = serde_json::json!(w);
                        }
                    }
                    Err(err) => v["error"] = serde_json::json!(err.to_string()),
                }
                v
            })
            .collect();
        serde_json::json!({
            "alpha": self.alpha,
            "tested": self.tested(),
            "consistent": self.consistent(),
            "violated": self.violations(),
            "errors": self.errors(),
            "summary": self.summary(),
            "results": results,
        })
    }
}

/// Picks the test that fits the column types and runs it.
pub fn test_statement(g: &CausalGraph, d: &Dataset, ci: &CiStatement, alpha: f64) -> Result<CiTestResult, CiTestError> {
    let x = g.name(ci.x);
    let w = g.sorted_names(&ci.w);
    let z = g.sorted_names(&ci.z);
    let mut kinds = Vec::new();
    for name in std::iter::once(x).chain(w.iter().copied()).chain(z.iter().copied()) {
        kinds.push(d.column(name)?.kind());
    }
    let (method, outcome) = if kinds.iter().all(|&k| k == ColumnKind::Continuous) {
        if w.len() == 1 {
            (CiMethod::FisherZ, fisher_z(d, x, w[0], &z)?)
        } else {
            (CiMethod::PartialF, partial_f(d, x, &w, &z)?)
        }
    } else if kinds.iter().all(|&k| k == ColumnKind::Categorical) {
        (CiMethod::ChiSquare, chi_square(d, x, &w, &z, DEFAULT_MIN_EXPECTED)?)
    } else {
        return Err(CiTestError::MixedTypes(format!("{x} | {}", join_names(g, &ci.w))));
    };
    Ok(CiTestResult {
        statement: ci.clone(),
        method,
        statistic: outcome.statistic,
        p_value: outcome.p_value,
        decision: if outcome.p_value < alpha { Decision::Violated } else { Decision::Consistent },
        warning: outcome.warning,
    })
}

/// Lists the statements of `g` and tests each against `d`. Statements are
/// tested in parallel; the report keeps listing order.
pub fn test_model(g: &CausalGraph, order: &VariableOrder, d: &Dataset, alpha: f64) -> Result<ModelReport, CiTestError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Precondition(format!("alpha = {alpha} is not a probability")).into());
    }
    for v in g.observed().iter() {
        d.column(g.name(v))?;
    }
    let mut statements = Vec::new();
    let _ = list_ci(g, order, |ci| {
        statements.push(ci);
        ControlFlow::Continue(())
    })?;
    let entries = statements
        .into_par_iter()
        .map(|ci| {
            let outcome = test_statement(g, d, &ci, alpha);
            ReportEntry { statement: ci, outcome }
        })
        .collect();
    Ok(ModelReport { alpha, entries })
}
