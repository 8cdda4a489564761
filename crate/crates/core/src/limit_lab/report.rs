use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::error::{LabError, Result};

/// Acceptance region of a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Below(f64),
    AtMost(f64),
    AtLeast(f64),
    Within([f64; 2]),
    Equal(f64),
}

impl Bound {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Bound::Below(b) => x < b,
            Bound::AtMost(b) => x <= b,
            Bound::AtLeast(b) => x >= b,
            Bound::Within([lo, hi]) => lo <= x && x <= hi,
            Bound::Equal(b) => x == b,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Bound::Below(b) => write!(f, "< {b}"),
            Bound::AtMost(b) => write!(f, "<= {b}"),
            Bound::AtLeast(b) => write!(f, ">= {b}"),
            Bound::Within([lo, hi]) => write!(f, "in [{lo}, {hi}]"),
            Bound::Equal(b) => write!(f, "== {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub statistic: f64,
    pub bound: Bound,
    /// Monte Carlo slack already folded into the statistic, in standard
    /// errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_se: Option<f64>,
    pub passed: bool,
}

impl Criterion {
    pub fn new(name: impl Into<String>, statistic: f64, bound: Bound) -> Self {
        Self { name: name.into(), statistic, bound, slack_se: None, passed: bound.admits(statistic) }
    }

    pub fn with_slack(mut self, se: f64) -> Self {
        self.slack_se = Some(se);
        self
    }
}

/// Per-replicate rows written next to the report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub artifact_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub criteria: Vec<Criterion>,
    /// Estimates, tables and diagnostics, keyed by name.
    pub stats: BTreeMap<String, Value>,
    /// Excursions cut at the cap.
    pub censored: u64,
    pub passed: bool,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            artifact_version: crate::ARTIFACT_VERSION.to_string(),
            seed: config.seed,
            config: config.clone(),
            criteria: Vec::new(),
            stats: BTreeMap::new(),
            censored: 0,
            passed: true,
            table: None,
        }
    }

    pub fn check(&mut self, c: Criterion) {
        self.passed &= c.passed;
        self.criteria.push(c);
    }

    pub fn stat<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.stats.insert(key.to_string(), v);
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// One line per criterion.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let slack = c.slack_se.map(|s| format!(" (slack {s} se)")).unwrap_or_default();
            let _ = writeln!(out, "{verdict} {}/{}: {:.6} {}{slack}", self.experiment, c.name, c.statistic, c.bound);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| LabError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn stem(&self) -> String {
        format!("{}-{}", self.experiment, self.seed)
    }

    /// Writes `{experiment}-{seed}.json`, the per-replicate `.csv` and a
    /// plotting script; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = self.stem();
        let mut written = Vec::new();
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&json, self.to_json()?)?;
        written.push(json);
        if let Some(table) = &self.table {
            let csv_path = dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&csv_path).map_err(|e| LabError::Io(e.to_string()))?;
            w.write_record(&table.header).map_err(|e| LabError::Io(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| LabError::Io(e.to_string()))?;
            }
            w.flush()?;
            written.push(csv_path);
            let script = dir.join(format!("{stem}.plot.py"));
            std::fs::write(&script, plot_script(&stem, &table.header))?;
            written.push(script);
        }
        Ok(written)
    }
}

/// A matplotlib script drawing the empirical CDF of every column but the
/// first (the replicate index).
pub fn plot_script(stem: &str, header: &[String]) -> String {
    let cols: Vec<String> = header.iter().skip(1).map(|h| format!("{h:?}")).collect();
    format!(
        "# Empirical CDFs of the per-replicate columns of {stem}.csv.\n\
         import csv\n\
         import matplotlib.pyplot as plt\n\
         \n\
         with open(\"{stem}.csv\") as fh:\n\
         \x20   rows = list(csv.DictReader(fh))\n\
         fig, ax = plt.subplots()\n\
         for col in [{cols}]:\n\
         \x20   xs = sorted(float(r[col]) for r in rows)\n\
         \x20   ax.step(xs, [(i + 1) / len(xs) for i in range(len(xs))], where=\"post\", label=col)\n\
         ax.set_xscale(\"symlog\")\n\
         ax.legend()\n\
         fig.savefig(\"{stem}.png\", dpi=120)\n",
        cols = cols.join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs_markov::Observable;
    use crate::limit_lab::config::SystemSpec;

    #[test]
    fn bounds_and_verdicts() {
        assert!(Bound::Below(0.03).admits(0.029));
        assert!(!Bound::Below(0.03).admits(0.03));
        assert!(Bound::AtMost(0.03).admits(0.03));
        assert!(Bound::Within([0.9, 1.1]).admits(1.1));
        assert!(!Bound::Equal(0.0).admits(1.0));
        let cfg = ExperimentConfig::new(SystemSpec::Dyadic, Observable::Power { alpha: 0.8 }, 10, 2, 5);
        let mut r = ExperimentReport::new("marginal", &cfg);
        r.check(Criterion::new("a", 0.01, Bound::Below(0.03)));
        assert!(r.passed);
        r.check(Criterion::new("b", 0.05, Bound::Below(0.03)));
        assert!(!r.passed);
        assert!(r.summary().contains("FAIL marginal/b"));
        assert_eq!(r.stem(), "marginal-5");
    }

    #[test]
    fn writes_files() {
        let dir = std::env::temp_dir().join(format!("stablab-report-{}", std::process::id()));
        let cfg = ExperimentConfig::new(SystemSpec::Dyadic, Observable::Power { alpha: 0.8 }, 10, 2, 1);
        let mut r = ExperimentReport::new("fdd", &cfg);
        let mut t = Table::new(&["replicate", "value"]);
        t.push(vec![0.0, 1.5]);
        r.table = Some(t);
        r.stat("ks", 0.25);
        let paths = r.write(&dir).unwrap();
        assert_eq!(paths.len(), 3);
        let back: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(std::fs::read_to_string(&paths[1]).unwrap(), "replicate,value\n0,1.5\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
