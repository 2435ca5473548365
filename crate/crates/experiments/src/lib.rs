//! Statistical verification of the limit theorems for random k-connected
//! chordal graphs of bounded tree-width: configuration, runners and reports.

pub mod clt;
pub mod config;
pub mod diameter;
pub mod distance;
pub mod error;
pub mod growth;
pub mod local;
pub mod profile;
pub mod report;
pub mod seed;
pub mod stats;

use std::path::Path;

use chordal_bgw::analytic::{Analysis, AnalysisConfig};
use chordal_bgw::chordal::{GraphSampler, SampleMode};

pub use config::{Common, Config};
pub use error::{ExpError, Result};
pub use report::{Check, Output, Report, Rule, Stat, Summary};

pub const EXPERIMENTS: [&str; 6] = ["growth", "diameter", "clt", "local", "distance", "profile"];

/// Runs experiment `name`, writing the JSON report and CSV tables into `out`
/// when given. The optional `workers` key fixes the size of the worker pool.
pub fn run(name: &str, cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let output = Output::new(out);
    let body = || -> Result<Report> {
        match name {
            "growth" => growth::run(cfg, &output),
            "diameter" => diameter::run(cfg, &output),
            "clt" => clt::run(cfg, &output),
            "local" => local::run(cfg, &output),
            "distance" => distance::run(cfg, &output),
            "profile" => profile::run(cfg, &output),
            other => Err(ExpError::Config(format!("unknown experiment {other:?}; expected one of {EXPERIMENTS:?}"))),
        }
    };
    let report = in_pool(cfg.get("workers")?, body)?;
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(report)
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(workers: Option<usize>, body: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => body(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| ExpError::Pool(e.to_string()))?
            .install(body),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool<T: Send>(_workers: Option<usize>, body: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    body()
}

/// Singularity, offspring law and constants for the configured class.
pub fn analysis(common: &Common) -> Result<Analysis> {
    Ok(Analysis::with_config(AnalysisConfig::new(common.t, common.k, 64, common.analytic_tol))?)
}

/// Draws per unrooted graph before giving up on the de-rooting rejection.
pub const DEROOT_ATTEMPTS: u64 = 10_000;

/// Graph sampler for sizes up to `n_max`; the blow-up mode reuses `analysis`.
pub fn graph_sampler(common: &Common, analysis: &Analysis, n_max: usize) -> Result<GraphSampler> {
    Ok(match common.mode {
        SampleMode::BlowupRejection => GraphSampler::with_analysis(analysis, n_max)?,
        SampleMode::RecursiveExact => GraphSampler::new(common.t, common.k, n_max, common.mode)?,
    })
}

/// Adds a check whose tolerance is read from `tol.<name>`.
pub fn judge(report: &mut Report, cfg: &Config, name: &str, value: Stat, reference: Option<f64>, rule: Rule) -> Result<()> {
    let tol = cfg.tolerance(name)?;
    report.check(Check::new(name, value, reference, rule, tol));
    Ok(())
}

/// Records the analytic constants of the class in the report.
pub fn record_constants(report: &mut Report, a: &Analysis) {
    let c = &a.constants;
    for (key, e) in [
        ("rho", c.rho),
        ("y", c.y),
        ("mean_xi", c.mean_xi),
        ("mean_zeta", c.mean_zeta),
        ("var_xi", c.var_xi),
        ("kappa_tree", c.kappa_tree),
    ] {
        report.constant(key, Stat::new(e.value, Some(e.error), 1));
    }
    report.constant("deficit", Stat::exact(c.deficit));
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:e}")
}
