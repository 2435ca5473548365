//! Diameter statistics: rescaled distribution, stability across sizes,
//! sub-Gaussian tail fit and moment ratios.

use chordal_bgw::par::map_range;

use crate::config::{Common, Config};
use crate::error::Result;
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::seed::stream;
use crate::stats::{ks_distance, mean_stat, ols};
use crate::{analysis, fmt, graph_sampler, judge, record_constants, DEROOT_ATTEMPTS};

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let c = Common::from_config(cfg)?;
    let a = analysis(&c)?;
    let n_max = *c.n_grid.last().unwrap();
    let sampler = graph_sampler(&c, &a, n_max)?;
    let mut report = Report::new("diameter", cfg, c.seed);
    record_constants(&mut report, &a);

    let mut by_n: Vec<Vec<u32>> = Vec::new();
    let mut rows = Vec::new();
    for &n in &c.n_grid {
        let draws = map_range(c.execution, c.replicas, |r| -> Result<(u32, u64)> {
            let mut rng = stream(c.seed, "diameter", n as u64, r as u64);
            let (g, attempts) = sampler.unrooted(n as u32, c.deroot, &mut rng, DEROOT_ATTEMPTS)?;
            Ok((g.diameter()?, attempts))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let ds: Vec<u32> = draws.iter().map(|d| d.0).collect();
        let root = (n as f64).sqrt();
        let scaled: Vec<f64> = ds.iter().map(|&d| d as f64 / root).collect();
        let squares: Vec<f64> = scaled.iter().map(|x| x * x).collect();
        let attempts: Vec<f64> = draws.iter().map(|d| d.1 as f64).collect();
        let mut s = Summary::new(n);
        s.put("scaled_diameter", mean_stat(&scaled));
        s.put("scaled_diameter_squared", mean_stat(&squares));
        s.put("rooted_draws_per_graph", mean_stat(&attempts));
        if let Some(prev) = by_n.last() {
            s.put("ks_previous", Stat::new(ks_distance(&scaled_of(prev, previous_n(&c.n_grid, n)), &scaled), None, c.replicas as u64));
        }
        report.summaries.push(s);
        for (r, &d) in ds.iter().enumerate() {
            rows.push(vec![n.to_string(), r.to_string(), d.to_string()]);
        }
        by_n.push(ds);
    }
    out.table(&mut report, "samples", &["n", "replica", "diameter"], &rows)?;

    let (n0, n1) = (c.n_grid[0], n_max);
    let first = scaled_of(&by_n[0], n0);
    let last = scaled_of(by_n.last().unwrap(), n1);
    judge(&mut report, cfg, "ks_first_last", Stat::new(ks_distance(&first, &last), None, c.replicas as u64), None, Rule::Below)?;

    let (m0, m1) = (mean_stat(&first), mean_stat(&last));
    let ratio = m1.value / m0.value;
    let ratio_se = ratio * ((m0.se.unwrap_or(0.0) / m0.value).powi(2) + (m1.se.unwrap_or(0.0) / m1.value).powi(2)).sqrt();
    judge(&mut report, cfg, "mean_ratio_change", Stat::new((ratio - 1.0).abs(), Some(ratio_se), c.replicas as u64), None, Rule::Below)?;

    // Tail fit: regress −log P̂(D ≥ x) on x²/n, then take the smallest C
    // making the bound hold at every observed point.
    let mut points = Vec::new();
    for (ds, &n) in by_n.iter().zip(&c.n_grid) {
        let mut sorted = ds.clone();
        sorted.sort_unstable();
        let m = sorted.len() as f64;
        let mut i = 0;
        while i < sorted.len() {
            let x = sorted[i];
            points.push((n, x, (sorted.len() - i) as f64 / m));
            while i < sorted.len() && sorted[i] == x {
                i += 1;
            }
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, x, _)| (x as f64).powi(2) / n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.2.ln()).collect();
    let fit = ols(&xs, &ys)?;
    let rate = fit.slope;
    let scale = points.iter().zip(&xs).map(|(p, x)| p.2 * (rate * x).exp()).fold(0.0, f64::max);
    let holds = points.iter().zip(&xs).all(|(p, x)| p.2 <= scale * (-rate * x).exp() * (1.0 + 1e-12));
    report.constant("tail_rate", Stat::new(rate, Some(fit.slope_se), points.len() as u64));
    report.constant("tail_scale", Stat::new(scale, None, points.len() as u64));
    report.constant("tail_fit_r_squared", Stat::new(fit.r_squared, None, points.len() as u64));
    judge(&mut report, cfg, "tail_rate", Stat::new(rate, Some(fit.slope_se), points.len() as u64), None, Rule::Above)?;
    report.check(crate::Check::holds("tail_bound", holds && scale.is_finite(), points.len() as u64));
    let tail: Vec<Vec<String>> = points
        .iter()
        .map(|&(n, x, p)| vec![n.to_string(), x.to_string(), fmt(p), fmt(scale * (-rate * (x as f64).powi(2) / n as f64).exp())])
        .collect();
    out.table(&mut report, "tail", &["n", "x", "survival", "bound"], &tail)?;
    Ok(report)
}

fn scaled_of(ds: &[u32], n: usize) -> Vec<f64> {
    let root = (n as f64).sqrt();
    ds.iter().map(|&d| d as f64 / root).collect()
}

fn previous_n(grid: &[usize], n: usize) -> usize {
    grid[grid.iter().position(|&m| m == n).unwrap() - 1]
}
