//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Keys prefixed with `tol.` declare pass/fail tolerances.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use chordal_bgw::chordal::{Deroot, SampleMode};
use chordal_bgw::par::Execution;

use crate::error::{ExpError, Result};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl FromStr for Config {
    type Err = ExpError;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ExpError::Config(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ExpError::Config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ExpError::Config(format!("line {}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(Config { entries })
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| ExpError::Config(format!("invalid value {v:?} for {key:?}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| ExpError::Config(format!("missing key {key:?}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|_| ExpError::Config(format!("invalid list item {s:?} for {key:?}"))))
                    .collect()
            })
            .transpose()
    }

    /// The declared tolerance `tol.<name>`, if any.
    pub fn tolerance(&self, name: &str) -> Result<Option<f64>> {
        self.get(&format!("tol.{name}"))
    }
}

/// Settings shared by all experiments.
#[derive(Clone, Debug)]
pub struct Common {
    pub t: usize,
    pub k: usize,
    /// Ascending sizes (non-root vertices).
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub mode: SampleMode,
    pub deroot: Deroot,
    pub execution: Execution,
    /// Tolerance on the singularity when computing the offspring law.
    pub analytic_tol: f64,
}

impl Common {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let t = cfg.require("t")?;
        let k = cfg.require("k")?;
        let n_grid: Vec<usize> = cfg.list("n_grid")?.ok_or_else(|| ExpError::Config("missing key \"n_grid\"".into()))?;
        if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExpError::Config("n_grid must be non-empty and strictly ascending".into()));
        }
        let replicas = cfg.get_or("replicas", 1usize)?;
        if replicas == 0 {
            return Err(ExpError::Config("replicas must be at least 1".into()));
        }
        let mode = cfg.get_or("mode", SampleMode::BlowupRejection)?;
        let execution = match cfg.raw("execution").unwrap_or("parallel") {
            "parallel" => Execution::Parallel,
            "sequential" => Execution::Sequential,
            other => return Err(ExpError::Config(format!("unknown execution {other:?}"))),
        };
        Ok(Common {
            t,
            k,
            n_grid,
            replicas,
            seed: cfg.get_or("seed", 0u64)?,
            mode,
            deroot: cfg.get_or("deroot", Deroot::Reweight)?,
            execution,
            analytic_tol: cfg.get_or("analytic_tol", 1e-12)?,
        })
    }
}
