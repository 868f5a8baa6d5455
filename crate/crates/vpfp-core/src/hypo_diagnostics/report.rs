//! Named margins. An entry passes when `value ≥ −tolerance`; informational
//! entries that miss are reported as `Info` and never count as failures.
//!
//! Text form (one table per check, TOML-compatible):
//!
//! ```text
//! [checks."prop.coercivity"]
//! value = 0.03125
//! tolerance = 1e-10
//! status = "pass"
//! time = 0.5        # optional locator
//! z_node = 3        # optional locator
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Locator {
    pub time: Option<f64>,
    pub z_node: Option<usize>,
}

impl Locator {
    pub fn at(time: f64, z_node: Option<usize>) -> Self {
        Self { time: Some(time), z_node }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub value: f64,
    pub tolerance: f64,
    pub informational: bool,
    pub locator: Locator,
}

impl CheckEntry {
    pub fn passes(&self) -> bool {
        self.value >= -self.tolerance
    }

    pub fn status(&self) -> Status {
        match (self.passes(), self.informational) {
            (true, _) => Status::Pass,
            (false, false) => Status::Fail,
            (false, true) => Status::Info,
        }
    }

    fn slack(&self) -> f64 {
        self.value + self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub entries: BTreeMap<String, CheckEntry>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the smallest slack seen for `id`.
    pub fn record(&mut self, id: &str, value: f64, tolerance: f64, locator: Locator) {
        self.insert(id, CheckEntry { value, tolerance, informational: false, locator });
    }

    pub fn record_info(&mut self, id: &str, value: f64, tolerance: f64, locator: Locator) {
        self.insert(id, CheckEntry { value, tolerance, informational: true, locator });
    }

    fn insert(&mut self, id: &str, entry: CheckEntry) {
        // NaN margins must surface as failures.
        let entry = if entry.value.is_nan() { CheckEntry { value: f64::NEG_INFINITY, ..entry } } else { entry };
        match self.entries.get_mut(id) {
            Some(existing) if existing.slack() <= entry.slack() => {}
            Some(existing) => *existing = entry,
            None => {
                self.entries.insert(id.to_string(), entry);
            }
        }
    }

    pub fn merge(&mut self, other: &CheckReport) {
        for (id, e) in &other.entries {
            self.insert(id, e.clone());
        }
    }

    pub fn merge_prefixed(&mut self, prefix: &str, other: &CheckReport) {
        for (id, e) in &other.entries {
            self.insert(&format!("{prefix}{id}"), e.clone());
        }
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.get(id)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.values().all(|e| e.status() != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.status() == Status::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Entry with the smallest slack among non-informational checks.
    pub fn worst(&self) -> Option<(&str, &CheckEntry)> {
        self.entries
            .iter()
            .filter(|(_, e)| !e.informational)
            .min_by(|a, b| a.1.slack().total_cmp(&b.1.slack()))
            .map(|(k, e)| (k.as_str(), e))
    }

    /// 0 all pass, 1 any failure, 2 informational deviations only.
    pub fn exit_code(&self) -> i32 {
        let statuses: Vec<Status> = self.entries.values().map(CheckEntry::status).collect();
        if statuses.contains(&Status::Fail) {
            1
        } else if statuses.contains(&Status::Info) {
            2
        } else {
            0
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, e) in &self.entries {
            let status = match e.status() {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            let _ = writeln!(out, "[checks.\"{id}\"]");
            let _ = writeln!(out, "value = {}", toml_float(e.value));
            let _ = writeln!(out, "tolerance = {}", toml_float(e.tolerance));
            let _ = writeln!(out, "informational = {}", e.informational);
            let _ = writeln!(out, "status = \"{status}\"");
            if let Some(t) = e.locator.time {
                let _ = writeln!(out, "time = {}", toml_float(t));
            }
            if let Some(z) = e.locator.z_node {
                let _ = writeln!(out, "z_node = {z}");
            }
            out.push('\n');
        }
        out
    }

    /// One aligned line per check.
    pub fn table(&self) -> String {
        let width = self.entries.keys().map(String::len).max().unwrap_or(0);
        let mut out = String::new();
        for (id, e) in &self.entries {
            let status = match e.status() {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            };
            let _ = writeln!(out, "{status}  {id:<width$}  value={:+.6e}  tol={:.1e}", e.value, e.tolerance);
        }
        out
    }
}

fn toml_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}
