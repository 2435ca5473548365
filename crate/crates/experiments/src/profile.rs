//! Degree profile of the conditioned tree: black-vertex density, black
//! outdegree frequencies, second moment and the largest white outdegree.

use chordal_bgw::analytic::OffspringLaw;
use chordal_bgw::par::map_range;
use chordal_bgw::trees::{degree_profile, ConditionedSampler, DegreeProfile};

use crate::config::{Common, Config};
use crate::error::Result;
use crate::local::TREE_ATTEMPTS;
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::seed::stream;
use crate::stats::mean_stat;
use crate::{analysis, judge, record_constants};

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let c = Common::from_config(cfg)?;
    let d_max: usize = cfg.get_or("max_degree", 3)?;
    let a = analysis(&c)?;
    let trees = ConditionedSampler::new(&a.law)?;
    let mut report = Report::new("profile", cfg, c.seed);
    record_constants(&mut report, &a);
    let mean_zeta = a.law.mean_zeta();
    let second_moment = 1.0 + a.law.var_xi();

    let mut rows = Vec::new();
    let mut last: Vec<DegreeProfile> = Vec::new();
    let mut white_ratio = 0.0f64;
    for &n in &c.n_grid {
        let profiles = map_range(c.execution, c.replicas, |r| -> Result<DegreeProfile> {
            let mut rng = stream(c.seed, "profile", n as u64, r as u64);
            let (tree, _) = trees.sample(n as u64, &mut rng, TREE_ATTEMPTS)?;
            Ok(degree_profile(&tree))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let nf = n as f64;
        let mut s = Summary::new(n);
        s.put("black_density", mean_stat(&profiles.iter().map(|p| p.black as f64 / nf).collect::<Vec<_>>()));
        for d in 0..=d_max {
            s.put(&format!("b_{d}_density"), mean_stat(&profiles.iter().map(|p| p.b(d) as f64 / nf).collect::<Vec<_>>()));
        }
        s.put("second_moment", mean_stat(&profiles.iter().map(|p| moment(p, mean_zeta, nf)).collect::<Vec<_>>()));
        s.put("second_moment_expected", Stat::exact(expected_moment(&a.law, n, mean_zeta)));
        let max_white = profiles.iter().map(|p| p.max_white_degree).max().unwrap_or(0);
        s.put("max_white_degree", Stat::new(max_white as f64, None, profiles.len() as u64));
        white_ratio = white_ratio.max(max_white as f64 / nf.ln());
        for (r, p) in profiles.iter().enumerate() {
            let mut row = vec![n.to_string(), r.to_string(), p.black.to_string(), p.max_white_degree.to_string()];
            row.extend((0..=d_max).map(|d| p.b(d).to_string()));
            rows.push(row);
        }
        report.summaries.push(s);
        last = profiles;
    }
    let mut header = vec!["n".to_string(), "replica".to_string(), "black".to_string(), "max_white_degree".to_string()];
    header.extend((0..=d_max).map(|d| format!("b_{d}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.table(&mut report, "samples", &header, &rows)?;

    let nf = *c.n_grid.last().unwrap() as f64;
    let stats = &report.summaries.last().unwrap().stats.clone();
    judge(&mut report, cfg, "black_density", stats["black_density"], Some(1.0 / mean_zeta), Rule::RelWithin)?;
    for d in 0..=d_max {
        let key = format!("b_{d}_density");
        judge(&mut report, cfg, &key, stats[&key], Some(a.law.xi_marginal(d as u32) / mean_zeta), Rule::RelWithin)?;
    }
    judge(&mut report, cfg, "second_moment", stats["second_moment"], Some(second_moment), Rule::RelWithin)?;
    let expected = stats["second_moment_expected"].value;
    judge(&mut report, cfg, "second_moment_finite_n", stats["second_moment"], Some(expected), Rule::RelWithin)?;
    let samples = (last.len() * c.n_grid.len()) as u64;
    judge(&mut report, cfg, "white_degree_log_factor", Stat::new(white_ratio, None, samples), None, Rule::Below)?;
    report.constant("largest_n", Stat::exact(nf));
    Ok(report)
}

/// Exact `E[Σ_d d²·E[ζ]·B_d(T_n) / n]` when `ξ = c·ζ`: the tree is an iid
/// `ξ` sequence of length `m = #₁T_n` conditioned on summing to `m − 1`, so
/// `E[B_d] = m·P(ξ = d)·P(S_{m−1} = m−1−d) / P(S_m = m−1)`. `NaN` otherwise.
fn expected_moment(law: &OffspringLaw, n: usize, mean_zeta: f64) -> f64 {
    let ratio = law.entries.iter().find(|e| e.zeta > 0).map(|e| e.xi as f64 / e.zeta as f64);
    let Some(ratio) = ratio.filter(|r| r.fract() == 0.0 && law.entries.iter().all(|e| e.xi as f64 == *r * e.zeta as f64)) else {
        return f64::NAN;
    };
    let m = 1 + ratio as usize * n;
    let top = m - 1;
    let mut p = vec![0.0; top + 1];
    for e in &law.entries {
        if (e.xi as usize) <= top {
            p[e.xi as usize] += e.p;
        }
    }
    let rest = convolution_power(&p, m - 1, top);
    let whole = (0..=top).map(|d| p[d] * rest[top - d]).sum::<f64>();
    let second: f64 = (0..=top).map(|d| (d * d) as f64 * p[d] * rest[top - d]).sum();
    m as f64 * second / whole * mean_zeta / n as f64
}

/// `p^{*e}` truncated to degree `top`.
fn convolution_power(p: &[f64], mut e: usize, top: usize) -> Vec<f64> {
    let mul = |a: &[f64], b: &[f64]| {
        let mut c = vec![0.0; top + 1];
        for (i, &x) in a.iter().enumerate() {
            if x != 0.0 {
                for (j, &y) in b[..=top - i].iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
        }
        c
    };
    let mut out = vec![0.0; top + 1];
    out[0] = 1.0;
    let mut base = p.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            out = mul(&out, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    out
}

/// `Σ_d d²·E[ζ]·B_d / n`.
fn moment(p: &DegreeProfile, mean_zeta: f64, n: f64) -> f64 {
    p.by_black_degree.iter().enumerate().map(|(d, &b)| (d * d) as f64 * b as f64).sum::<f64>() * mean_zeta / n
}
