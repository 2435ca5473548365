//! Machine-readable experiment reports and CSV output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;
use crate::error::Result;

/// A numeric estimate with its standard error and sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub value: f64,
    pub se: Option<f64>,
    pub samples: u64,
}

impl Stat {
    pub fn new(value: f64, se: Option<f64>, samples: u64) -> Self {
        Stat { value, se, samples }
    }

    /// Exact value (no sampling error).
    pub fn exact(value: f64) -> Self {
        Stat { value, se: Some(0.0), samples: 1 }
    }
}

/// Summary statistics at one size `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub stats: BTreeMap<String, Stat>,
}

impl Summary {
    pub fn new(n: usize) -> Self {
        Summary { n, stats: BTreeMap::new() }
    }

    pub fn put(&mut self, key: &str, stat: Stat) {
        self.stats.insert(key.to_string(), stat);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|value − reference| ≤ tolerance`
    AbsWithin,
    /// `|value − reference| ≤ tolerance·|reference|`
    RelWithin,
    /// `value < tolerance`
    Below,
    /// `value > tolerance`
    Above,
    /// `value` is 1 (true) or 0 (false); no tolerance.
    Holds,
}

/// One pass/fail claim. Without a declared tolerance the check is reported
/// but not judged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Stat,
    pub reference: Option<f64>,
    pub rule: Rule,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl Check {
    pub fn new(name: &str, value: Stat, reference: Option<f64>, rule: Rule, tolerance: Option<f64>) -> Self {
        let v = value.value;
        let passed = match rule {
            Rule::Holds => Some(v == 1.0),
            _ => tolerance.map(|tol| match rule {
                Rule::AbsWithin => (v - reference.unwrap_or(0.0)).abs() <= tol,
                Rule::RelWithin => {
                    let r = reference.unwrap_or(0.0);
                    (v - r).abs() <= tol * r.abs()
                }
                Rule::Below => v < tol,
                Rule::Above => v > tol,
                Rule::Holds => unreachable!(),
            }),
        };
        Check { name: name.to_string(), value, reference, rule, tolerance, passed }
    }

    pub fn holds(name: &str, ok: bool, samples: u64) -> Self {
        Check::new(name, Stat::new(if ok { 1.0 } else { 0.0 }, None, samples), None, Rule::Holds, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub constants: BTreeMap<String, Stat>,
    pub summaries: Vec<Summary>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, cfg: &Config, seed: u64) -> Self {
        Report {
            experiment: experiment.to_string(),
            seed,
            config: cfg.entries().clone(),
            constants: BTreeMap::new(),
            summaries: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn constant(&mut self, key: &str, stat: Stat) {
        self.constants.insert(key.to_string(), stat);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// False iff some judged check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.passed == Some(false)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&path, self.to_json()?)?;
        Ok(path)
    }
}

/// Output sink for CSV tables; `None` writes nothing.
#[derive(Clone, Debug)]
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<&Path>) -> Self {
        Output { dir: dir.map(Path::to_path_buf) }
    }

    /// Writes a CSV table and records its name in the report.
    pub fn table<S: AsRef<str>>(&self, report: &mut Report, name: &str, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        std::fs::create_dir_all(dir)?;
        let file = format!("{}_{name}.csv", report.experiment);
        let mut w = csv::Writer::from_path(dir.join(&file))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(AsRef::as_ref))?;
        }
        w.flush()?;
        report.files.push(file);
        Ok(())
    }
}
