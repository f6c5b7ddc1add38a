//! Run records and output rendering.
//!
//! The JSON record is the complete, lossless view of a run; the CSV view is
//! a fixed-column subset of it, and the text view is for humans. Everything
//! except `duration_seconds` is reproducible byte for byte when a command is
//! re-run with the same flags and seed.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use spinsim_core::montecarlo::TrialTally;
use spinsim_core::StatReport64;

use crate::args::{Format, OutputArgs};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    /// Echo of the resolved parameters (angles in radians).
    pub params: Value,
    /// Closed-form quantities for this configuration.
    pub analytic: Value,
    /// Simulation tally; absent in --check mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tally: Option<TrialTally>,
    /// Statistical comparison; absent in --check mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<StatReport64>,
    /// Per-point rows for sweep runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Value>>,
    /// Overall verdict: analytic checks and, if sampled, the stat report.
    pub passed: bool,
    /// Wall-clock duration. The one field excluded from byte-identical
    /// reproducibility.
    pub duration_seconds: f64,
}

/// Fixed-column CSV payload.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Format a float with shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Format an optional float; empty cell when absent.
pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Rendered {
    pub record: RunRecord,
    pub csv: CsvTable,
    pub text: String,
}

impl Rendered {
    pub fn emit(&self, output: &OutputArgs) -> Result<(), CliError> {
        let payload = match output.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.record)
                    .map_err(|e| CliError::config(format!("cannot serialize record: {e}")))?;
                s.push('\n');
                s
            }
            Format::Csv => self.csv.render(),
            Format::Text => self.text.clone(),
        };
        match &output.out {
            Some(path) => {
                let mut f = std::fs::File::create(path).map_err(|e| {
                    CliError::config(format!("cannot create {}: {e}", path.display()))
                })?;
                f.write_all(payload.as_bytes())
                    .map_err(|e| CliError::config(format!("write failed: {e}")))?;
            }
            None => {
                print!("{payload}");
            }
        }
        Ok(())
    }
}

/// Text block for a stat report.
pub fn report_text(report: &StatReport64) -> String {
    let mut s = String::new();
    for o in &report.outcomes {
        s.push_str(&format!(
            "  {:>3}: count {:>9}  freq {:<22} expected {:<22} z {:+.3}{}\n",
            o.label,
            o.count,
            num(o.frequency),
            num(o.expected),
            o.z,
            if o.hard_fail {
                "  [impossible outcome observed]"
            } else {
                ""
            }
        ));
    }
    s.push_str(&format!(
        "  chi² = {:.4} (dof {}), p = {:.6} -> {}\n",
        report.chi_squared,
        report.dof,
        report.p_value,
        if report.pass { "pass" } else { "FAIL" }
    ));
    s
}
