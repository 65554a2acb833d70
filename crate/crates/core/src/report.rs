//! Named verdicts and plot-ready series.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    /// Supporting numbers (standard errors, ratios, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl Check {
    pub fn new(id: impl Into<String>, value: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            id: id.into(),
            value,
            tolerance,
            verdict: Verdict::from_bool(passed),
            seeds: Vec::new(),
            note: String::new(),
            details: BTreeMap::new(),
        }
    }

    /// Passes when `value <= tolerance`.
    pub fn at_most(id: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(id, value, tolerance, value <= tolerance)
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(id: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(id, value, tolerance, value >= tolerance)
    }

    pub fn seeds(mut self, seeds: &[u64]) -> Self {
        self.seeds = seeds.to_vec();
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// A table with named columns, exported as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::mismatch(format!(
                "series {} has {} columns, row has {}",
                self.name,
                self.columns.len(),
                row.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    /// Config hash, seeds and versions.
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn push_series(&mut self, series: Series) {
        self.series.push(series);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.series.extend(other.series);
        self.provenance.extend(other.provenance);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.id.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json` and one `<series>.csv` per series into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        for s in &self.series {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{}.csv", s.name)))?);
            s.write_csv(&mut f)?;
            f.flush()?;
        }
        Ok(())
    }
}
