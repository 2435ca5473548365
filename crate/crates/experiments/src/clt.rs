//! Clique-count central limit statistics: linear growth of the means,
//! covariance per vertex and normality of the fluctuations.

use chordal_bgw::par::map_range;

use crate::config::{Common, Config};
use crate::error::{ExpError, Result};
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::seed::stream;
use crate::stats::{covariance, mardia_kurtosis, mean_stat, min_eigenvalue, ols, shape, shape_se};
use crate::{analysis, graph_sampler, judge, record_constants, DEROOT_ATTEMPTS};

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let c = Common::from_config(cfg)?;
    if c.t < 2 {
        return Err(ExpError::Config("the clique vector needs t >= 2".into()));
    }
    if c.replicas < 3 {
        return Err(ExpError::Config("clique statistics need at least 3 replicas".into()));
    }
    let a = analysis(&c)?;
    let n_max = *c.n_grid.last().unwrap();
    let sampler = graph_sampler(&c, &a, n_max)?;
    let mut report = Report::new("clt", cfg, c.seed);
    record_constants(&mut report, &a);
    let sizes: Vec<usize> = (2..=c.t).collect();

    let mut means: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
    let mut rows = Vec::new();
    let mut last = Vec::new();
    for &n in &c.n_grid {
        let counts = map_range(c.execution, c.replicas, |r| -> Result<Vec<f64>> {
            let mut rng = stream(c.seed, "clt", n as u64, r as u64);
            let (g, _) = sampler.unrooted(n as u32, c.deroot, &mut rng, DEROOT_ATTEMPTS)?;
            sizes.iter().map(|&j| Ok(g.clique_count(j)? as f64)).collect()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut s = Summary::new(n);
        let cov = covariance(&counts);
        let m = counts.len();
        for (i, &j) in sizes.iter().enumerate() {
            let col: Vec<f64> = counts.iter().map(|r| r[i]).collect();
            let mean = mean_stat(&col);
            means[i].push(mean.value);
            s.put(&format!("alpha_{j}"), Stat::new(mean.value / n as f64, mean.se.map(|e| e / n as f64), m as u64));
            // Var of a sample variance ≈ σ⁴·(2/(m−1) + κ/m); the Gaussian part is reported.
            let var = cov[(i, i)];
            s.put(&format!("sigma_{j}_{j}"), Stat::new(var / n as f64, Some(var / n as f64 * (2.0 / (m as f64 - 1.0)).sqrt()), m as u64));
            let (skew, kurt) = shape(&col);
            let (skew_se, kurt_se) = shape_se(m);
            s.put(&format!("skewness_{j}"), Stat::new(skew, Some(skew_se), m as u64));
            s.put(&format!("excess_kurtosis_{j}"), Stat::new(kurt, Some(kurt_se), m as u64));
        }
        for (i, &a) in sizes.iter().enumerate() {
            for (l, &b) in sizes.iter().enumerate().skip(i + 1) {
                s.put(&format!("sigma_{a}_{b}"), Stat::new(cov[(i, l)] / n as f64, None, m as u64));
            }
        }
        let sigma = cov.scale(1.0 / n as f64);
        let diag_se = (0..sizes.len()).map(|i| sigma[(i, i)] * (2.0 / (m as f64 - 1.0)).sqrt()).fold(0.0, f64::max);
        s.put("sigma_min_eigenvalue", Stat::new(min_eigenvalue(&sigma), Some(diag_se), m as u64));
        if let Some(z) = mardia_kurtosis(&counts) {
            s.put("mardia_kurtosis_z", Stat::new(z, Some(1.0), m as u64));
        }
        for (r, row) in counts.iter().enumerate() {
            let mut line = vec![n.to_string(), r.to_string()];
            line.extend(row.iter().map(|x| x.to_string()));
            rows.push(line);
        }
        report.summaries.push(s);
        last = counts;
    }
    let mut header = vec!["n".to_string(), "replica".to_string()];
    header.extend(sizes.iter().map(|j| format!("cliques_{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.table(&mut report, "samples", &header, &rows)?;

    let final_summary = report.summaries.last().unwrap().clone();
    let m = last.len() as u64;
    for &j in &sizes {
        let skew = final_summary.stats[&format!("skewness_{j}")];
        let kurt = final_summary.stats[&format!("excess_kurtosis_{j}")];
        judge(&mut report, cfg, &format!("abs_skewness_{j}"), Stat::new(skew.value.abs(), skew.se, m), Some(0.0), Rule::AbsWithin)?;
        judge(&mut report, cfg, &format!("abs_excess_kurtosis_{j}"), Stat::new(kurt.value.abs(), kurt.se, m), Some(0.0), Rule::AbsWithin)?;
    }
    if c.n_grid.len() >= 3 {
        let xs: Vec<f64> = c.n_grid.iter().map(|&n| n as f64).collect();
        for (i, &j) in sizes.iter().enumerate() {
            let fit = ols(&xs, &means[i])?;
            judge(&mut report, cfg, &format!("linear_r_squared_{j}"), Stat::new(fit.r_squared, None, xs.len() as u64), None, Rule::Above)?;
        }
    }
    let eig = final_summary.stats["sigma_min_eigenvalue"];
    // The smallest eigenvalue may dip below zero by the declared number of
    // standard errors.
    let floor = cfg.tolerance("sigma_psd_se")?.map(|k| -k * eig.se.unwrap_or(0.0));
    report.check(crate::Check::new("sigma_psd", eig, None, Rule::Above, floor));
    Ok(report)
}
