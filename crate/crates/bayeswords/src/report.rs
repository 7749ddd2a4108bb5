//! Report rendering: a human-readable table, a JSON document and plot data.

use std::fmt::Write as _;

use bayeswords_core::dbn::StatePoint;
use bayeswords_core::eval::{EvaluationReport, TOP_N};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::Result;

/// Report file contents: the configuration that produced it and the
/// evaluation on the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub classifier: String,
    pub config: String,
    pub test_samples: usize,
    pub evaluation: EvaluationReport,
    /// Selected `[Q1, Q2]` per class for coupled HMMs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<[usize; 2]>>,
}

impl ReportDocument {
    pub fn new(
        cfg: &Config,
        evaluation: EvaluationReport,
        states: Option<Vec<[usize; 2]>>,
    ) -> Self {
        Self {
            classifier: cfg.classifier.to_string(),
            config: cfg.to_text(),
            test_samples: evaluation.counts.iter().sum(),
            evaluation,
            states,
        }
    }

    /// Deterministic: field order is fixed and floats are printed in
    /// shortest round-trip form.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("classifier: {}\n", self.classifier);
        out.push_str(&format_table(&self.evaluation));
        out
    }
}

/// Per-class Top-N rates, overall rates, T_m and the confusion matrix.
/// Classes are numbered from 1.
pub fn format_table(r: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>6} {:>6}", "class", "n");
    for n in 1..=TOP_N {
        let _ = write!(out, " {:>7}", format!("top-{n}"));
    }
    out.push('\n');
    for (c, (rates, count)) in r.per_class_top_n.iter().zip(&r.counts).enumerate() {
        let _ = write!(out, "{:>6} {:>6}", c + 1, count);
        for v in rates {
            let _ = write!(out, " {v:>7.2}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:>6} {:>6}", "all", r.counts.iter().sum::<usize>());
    for v in &r.overall_top_n {
        let _ = write!(out, " {v:>7.2}");
    }
    let _ = writeln!(out, "\nT_m = {:.2}%\n", r.t_m);
    out.push_str("confusion (% of row; rows true class, columns predicted):\n");
    let _ = write!(out, "{:>6}", "");
    for c in 0..r.classes {
        let _ = write!(out, " {:>6}", format!("C{}", c + 1));
    }
    out.push('\n');
    for (c, row) in r.confusion.iter().enumerate() {
        let _ = write!(out, "{:>6}", format!("C{}", c + 1));
        for v in row {
            let _ = write!(out, " {v:>6.2}");
        }
        out.push('\n');
    }
    out
}

/// Rate-vs-Q curves as whitespace-separated columns `class q rate cost`.
pub fn format_state_curves(curves: &[Vec<StatePoint>]) -> String {
    let mut out = String::from("# class q rate cost\n");
    for (c, curve) in curves.iter().enumerate() {
        for p in curve {
            let _ = writeln!(out, "{} {} {} {}", c + 1, p.q, p.rate, p.cost);
        }
    }
    out
}
