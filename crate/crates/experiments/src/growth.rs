//! Growth of the exact counts: ratio estimates of `1/ρ`, the local count
//! exponent and the rescaled size probabilities of the tree.

use chordal_bgw::analytic::{Analysis, AnalysisConfig};
use chordal_bgw::gfchain::{ChainConfig, ChainDepth, GFChain};

use crate::config::Config;
use crate::error::{ExpError, Result};
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::stats::neville_at_zero;
use crate::{fmt, judge, record_constants};

fn pair(cfg: &Config, key: &str) -> Result<(usize, usize)> {
    match cfg.list::<usize>(key)?.as_deref() {
        Some(&[m, n]) if m < n => Ok((m, n)),
        _ => Err(ExpError::Config(format!("{key:?} must be two ascending sizes"))),
    }
}

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let (t, k): (usize, usize) = (cfg.require("t")?, cfg.require("k")?);
    let seed = cfg.get_or("seed", 0u64)?;
    let grid: Vec<usize> = cfg.list("n_grid")?.ok_or_else(|| ExpError::Config("missing key \"n_grid\"".into()))?;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 2 {
        return Err(ExpError::Config("n_grid must be ascending sizes of at least 2".into()));
    }
    let exponent = pair(cfg, "exponent_range")?;
    let size_prob = pair(cfg, "size_prob_range")?;
    let points: u32 = cfg.get_or("extrapolation_points", 4)?;
    let top = *grid.last().unwrap();
    let order = top.max(exponent.1).max(size_prob.1) + 1;
    if (top >> (points.max(1) - 1)) < 2 {
        return Err(ExpError::Config("too many extrapolation points for the largest size".into()));
    }

    let analysis = Analysis::with_config(AnalysisConfig::new(t, k, order, cfg.get_or("analytic_tol", 1e-12)?))?;
    let rho = analysis.constants.rho.value;
    let chain = GFChain::<f64>::build(ChainConfig::new(t, k, order).depth(ChainDepth::Complete).decoration_order(0), rho)?;
    let mut report = Report::new("growth", cfg, seed);
    record_constants(&mut report, &analysis);

    // u_N = |G_{t,k,N}| ρ^N / N!, so ratios and exponents need no factorials.
    let u = |n: usize| -> Result<f64> {
        let c = chain.unrooted_coefficient(n)?;
        if c <= 0.0 {
            return Err(ExpError::Config(format!("no graphs with {n} vertices in the class")));
        }
        Ok(c)
    };
    let ratio = |n: usize| -> Result<f64> { Ok(u(n + 1)? / u(n)? / rho) };
    let local_exponent = |m: usize, n: usize| -> Result<f64> { Ok((u(n)? / u(m)?).ln() / (n as f64 / m as f64).ln()) };
    let rescaled = |n: usize| -> Result<f64> { Ok((n as f64).powf(1.5) * analysis.size_probability(n)?) };

    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for &n in &grid {
        let mut s = Summary::new(n);
        let r = ratio(n)?;
        ratios.push(r);
        s.put("ratio", Stat::exact(r));
        let e = local_exponent(n / 2, n)?;
        s.put("local_exponent", Stat::exact(e));
        let p = rescaled(n)?;
        s.put("rescaled_size_probability", Stat::exact(p));
        rows.push(vec![n.to_string(), fmt(r), fmt(e), fmt(p)]);
        report.summaries.push(s);
    }
    out.table(&mut report, "by_n", &["n", "ratio", "local_exponent", "rescaled_size_probability"], &rows)?;

    let xs: Vec<f64> = (0..points).map(|i| 1.0 / (top >> i) as f64).collect();
    let ys = xs.iter().map(|&x| ratio((1.0 / x).round() as usize)).collect::<Result<Vec<_>>>()?;
    let inv_rho = neville_at_zero(&xs, &ys);
    judge(&mut report, cfg, "inv_rho", Stat::exact(inv_rho), Some(1.0 / rho), Rule::AbsWithin)?;

    let e = local_exponent(exponent.0, exponent.1)?;
    judge(&mut report, cfg, "count_exponent", Stat::exact(e), Some(-2.5), Rule::AbsWithin)?;

    let (p0, p1) = (rescaled(size_prob.0)?, rescaled(size_prob.1)?);
    judge(&mut report, cfg, "size_prob_change", Stat::exact((p1 - p0).abs() / p0), None, Rule::Below)?;

    let up = ratios.windows(2).all(|w| w[1] >= w[0]);
    let down = ratios.windows(2).all(|w| w[1] <= w[0]);
    report.check(crate::Check::holds("ratio_monotone", up || down, grid.len() as u64));
    Ok(report)
}
