//! Experiment reports and the verdict thresholds they are judged by.
//!
//! Non-finite numbers never reach the JSON: `+inf` is written as the string
//! `"inf"` (the limit functional's value off its constraint set), and NaN
//! is refused when the value is recorded.

use crate::error::Result;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;

pub const THRESHOLDS_VERSION: &str = "1";

/// The verdict thresholds, echoed into every report.
pub const THRESHOLDS: &[(&str, f64)] = &[
    ("boundary_delta", 0.05),
    ("ring_fraction", 0.90),
    ("ring_radius_tol", 0.05),
    ("shell_delta_3d", 0.07),
    ("shell_fraction_3d", 0.85),
    ("ball_like_asymmetry", 0.25),
    ("radial_bin_width", 0.05),
    ("radial_bin_min_share", 0.01),
    ("radial_min_bins", 5.0),
    ("spread_min_radius", 0.15),
    ("limit_energy_rel_tol", 0.05),
    ("recovery_slack", 1e-9),
    ("kkt_tol", 1e-6),
    ("potential_excess", 1e-3),
    ("laplacian_tol", 1e-4),
    ("laplacian_step", 1e-4),
    ("identity_tol", 1e-10),
    ("superadditivity_tol", 1e-9),
    ("capacity_refinement_slack", 0.0),
];

/// Looks up a threshold by name; panics on unknown names, which are bugs.
pub fn threshold(name: &str) -> f64 {
    THRESHOLDS
        .iter()
        .find(|(k, _)| *k == name)
        .map(|(_, v)| *v)
        .unwrap_or_else(|| panic!("no threshold named {name}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Outcome {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub outcome: Outcome,
    pub measured: Value,
    pub threshold: Value,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// A table of equally long numeric columns.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Series {
        Series {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "series row width");
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
    pub verdicts: Vec<Verdict>,
    pub thresholds: Value,
    pub timestamp: String,
    pub tool_version: String,
}

/// JSON number, with `+-inf` as the sentinel strings.
pub fn num(x: f64) -> Value {
    assert!(!x.is_nan(), "NaN reached a report");
    if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        json!(x)
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        let table: BTreeMap<&str, Value> = THRESHOLDS.iter().map(|&(k, v)| (k, num(v))).collect();
        ExperimentReport {
            name: name.to_string(),
            params: BTreeMap::new(),
            outputs: BTreeMap::new(),
            series: BTreeMap::new(),
            verdicts: Vec::new(),
            thresholds: json!({ "version": THRESHOLDS_VERSION, "values": table }),
            timestamp: timestamp(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.outputs.insert(key.to_string(), value.into());
        self
    }

    pub fn verdict(
        &mut self,
        criterion: &str,
        outcome: Outcome,
        measured: impl Into<Value>,
        threshold: impl Into<Value>,
        note: impl Into<String>,
    ) {
        self.verdicts.push(Verdict {
            criterion: criterion.to_string(),
            outcome,
            measured: measured.into(),
            threshold: threshold.into(),
            note: note.into(),
        });
    }

    pub fn outcome(&self) -> Outcome {
        let has = |o| self.verdicts.iter().any(|v| v.outcome == o);
        if has(Outcome::Fail) {
            Outcome::Fail
        } else if has(Outcome::Inconclusive) {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        }
    }

    /// Process exit code: 0 all pass, 2 any failure, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.outcome() {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
            Outcome::Inconclusive => 3,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the series tables, each preceded by a `# name` line and
    /// separated by blank lines.
    pub fn write_series_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, (name, series)) in self.series.iter().enumerate() {
            if k > 0 {
                writeln!(out)?;
            }
            writeln!(out, "# {name}")?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&series.columns)?;
            for row in &series.rows {
                w.write_record(row.iter().map(cell))?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

// SOURCE_DATE_EPOCH pins the stamp for reproducible reports
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
