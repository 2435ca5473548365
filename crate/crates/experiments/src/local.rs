//! Local limit of the tree: annealed marked-fringe frequencies against the
//! size-biased limit, and concentration of per-tree fringe frequencies.

use std::collections::BTreeMap;

use chordal_bgw::analytic::OffspringLaw;
use chordal_bgw::par::map_range;
use chordal_bgw::trees::{fringe_at, fringe_counts, fringe_probability, ConditionedSampler, Fringe, TwoTypeTree, WhiteRef};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{Common, Config};
use crate::error::{ExpError, Result};
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::seed::stream;
use crate::stats::{total_variation, variance};
use crate::{analysis, fmt, judge, record_constants};

pub const TREE_ATTEMPTS: u64 = 10_000_000;

/// Key of the bin collecting every fringe outside the enumerated set.
const OTHER: &str = "other";

/// All marked fringes with the mark at height exactly `h` and at most
/// `max_size` vertices, with their limiting probabilities.
pub fn enumerate_fringes(law: &OffspringLaw, h: u32, max_size: u64) -> Result<BTreeMap<Fringe, f64>> {
    let mut out = BTreeMap::new();
    if h == 0 {
        out.insert(Fringe::Leaf, 1.0);
        return Ok(out);
    }
    let mut shapes = Vec::new();
    grow(law, &mut Vec::new(), 1, max_size, &mut shapes);
    for seq in shapes {
        let tree = TwoTypeTree::from_preorder(seq.iter().map(|p| p.0).collect(), seq.iter().map(|p| p.1).collect())?;
        for v in 0..tree.black_count() as u32 {
            if tree.depth(v) + 1 != h {
                continue;
            }
            for index in 0..tree.zeta(v) {
                let tau = Fringe::Tree { offspring: seq.clone(), mark: WhiteRef { parent: v, index } };
                let p = fringe_probability(law, &tau)?;
                out.insert(tau, p);
            }
        }
    }
    Ok(out)
}

fn grow(law: &OffspringLaw, seq: &mut Vec<(u32, u32)>, pending: u64, budget: u64, out: &mut Vec<Vec<(u32, u32)>>) {
    if pending == 0 {
        out.push(seq.clone());
        return;
    }
    for e in &law.entries {
        let cost = 1 + e.zeta as u64;
        let next = pending - 1 + e.xi as u64;
        if e.p <= 0.0 || cost + next > budget {
            continue;
        }
        seq.push((e.xi, e.zeta));
        grow(law, seq, next, budget - cost, out);
        seq.pop();
    }
}

fn label(tau: &Fringe) -> String {
    tau.key()
}

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let c = Common::from_config(cfg)?;
    let h_max: u32 = cfg.get_or("height", 1)?;
    let max_size: u64 = cfg.get_or("max_size", 4)?;
    let marks: usize = cfg.get_or("marks", 100_000)?;
    let tv_n: usize = cfg.get_or("tv_n", *c.n_grid.last().unwrap())?;
    let track_min: f64 = cfg.get_or("track_min_prob", 0.01)?;
    let quenched_height: u32 = cfg.get_or("quenched_height", h_max)?;
    if !c.n_grid.contains(&tv_n) {
        return Err(ExpError::Config(format!("tv_n = {tv_n} must be in n_grid")));
    }
    if c.replicas < 2 {
        return Err(ExpError::Config("per-tree variances need at least 2 replicas".into()));
    }
    let a = analysis(&c)?;
    let trees = ConditionedSampler::new(&a.law)?;
    let mut report = Report::new("local", cfg, c.seed);
    record_constants(&mut report, &a);

    let theory: Vec<BTreeMap<Fringe, f64>> = (0..=h_max).map(|h| enumerate_fringes(&a.law, h, max_size)).collect::<Result<_>>()?;
    let quenched_theory = enumerate_fringes(&a.law, quenched_height, max_size)?;
    let tracked: Vec<Fringe> = quenched_theory.iter().filter(|(_, &p)| p >= track_min).map(|(t, _)| t.clone()).collect();
    if tracked.is_empty() {
        return Err(ExpError::Config("no fringe reaches track_min_prob".into()));
    }
    let per_tree = marks.div_ceil(c.replicas);

    let mut variances: Vec<Vec<f64>> = Vec::new();
    let mut quenched_rows = Vec::new();
    let mut annealed: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); theory.len()];
    let mut drawn = 0u64;
    for &n in &c.n_grid {
        let results = map_range(c.execution, c.replicas, |r| -> Result<(Vec<f64>, Vec<Vec<String>>)> {
            let mut rng = stream(c.seed, "local", n as u64, r as u64);
            let (tree, _) = trees.sample(n as u64, &mut rng, TREE_ATTEMPTS)?;
            let (counts, _) = fringe_counts(&tree, quenched_height, max_size);
            let freqs = tracked.iter().map(|t| counts.get(t).copied().unwrap_or(0) as f64 / n as f64).collect();
            let mut observed = Vec::new();
            if n == tv_n {
                let mut mrng = stream(c.seed, "local-marks", n as u64, r as u64);
                for _ in 0..per_tree {
                    let w = tree.white(mrng.gen_range(0..tree.white_count()));
                    observed.push(
                        theory
                            .iter()
                            .enumerate()
                            .map(|(h, th)| {
                                let f = fringe_at(&tree, w, h as u32);
                                if th.contains_key(&f) { label(&f) } else { OTHER.to_string() }
                            })
                            .collect(),
                    );
                }
            }
            Ok((freqs, observed))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let mut s = Summary::new(n);
        let mut vars = Vec::new();
        for (i, tau) in tracked.iter().enumerate() {
            let col: Vec<f64> = results.iter().map(|r| r.0[i]).collect();
            let v = variance(&col);
            let m = col.len() as f64;
            s.put(&format!("freq_variance[{}]", label(tau)), Stat::new(v, Some(v * (2.0 / (m - 1.0)).sqrt()), col.len() as u64));
            s.put(&format!("freq_mean[{}]", label(tau)), crate::stats::mean_stat(&col));
            quenched_rows.push(vec![n.to_string(), label(tau), fmt(crate::stats::mean(&col)), fmt(v)]);
            vars.push(v);
        }
        variances.push(vars);
        for (_, observed) in &results {
            for row in observed {
                drawn += 1;
                for (h, key) in row.iter().enumerate() {
                    *annealed[h].entry(key.clone()).or_insert(0) += 1;
                }
            }
        }
        report.summaries.push(s);
    }
    out.table(&mut report, "quenched", &["n", "fringe", "mean_frequency", "variance"], &quenched_rows)?;

    let mut tv_max = 0.0f64;
    let mut annealed_rows = Vec::new();
    let mut worst_p = 1.0f64;
    let mut tests = 0usize;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    for (h, th) in theory.iter().enumerate() {
        let mut p: BTreeMap<String, f64> = th.iter().map(|(t, &p)| (label(t), p)).collect();
        let other = (1.0 - th.values().sum::<f64>()).max(0.0);
        p.insert(OTHER.to_string(), other);
        let q: BTreeMap<String, f64> = annealed[h].iter().map(|(k, &v)| (k.clone(), v as f64 / drawn as f64)).collect();
        let tv = total_variation(&p, &q);
        tv_max = tv_max.max(tv);
        report.constant(&format!("tv_height_{h}"), Stat::new(tv, None, drawn));
        for (key, &pt) in &p {
            let count = annealed[h].get(key).copied().unwrap_or(0);
            annealed_rows.push(vec![h.to_string(), key.clone(), fmt(pt), count.to_string(), fmt(count as f64 / drawn as f64)]);
            if pt > 0.0 && pt < 1.0 {
                let z = (count as f64 - drawn as f64 * pt) / (drawn as f64 * pt * (1.0 - pt)).sqrt();
                worst_p = worst_p.min(2.0 * (1.0 - normal.cdf(z.abs())));
                tests += 1;
            }
        }
        if h == 0 {
            let leaf = annealed[0].get(&label(&Fringe::Leaf)).copied().unwrap_or(0);
            report.check(crate::Check::holds("leaf_frequency_is_one", leaf == drawn, drawn));
        }
    }
    out.table(&mut report, "annealed", &["height", "fringe", "probability", "count", "frequency"], &annealed_rows)?;
    judge(&mut report, cfg, "tv", Stat::new(tv_max, None, drawn), None, Rule::Below)?;
    // Bonferroni-adjusted smallest two-sided p-value over all fringe bins.
    let adjusted = (worst_p * tests.max(1) as f64).min(1.0);
    judge(&mut report, cfg, "fringe_p_value", Stat::new(adjusted, None, drawn), None, Rule::Above)?;

    let (first, last) = (&variances[0], variances.last().unwrap());
    let decreasing = first.iter().zip(last).all(|(a, b)| b < a);
    report.check(crate::Check::holds("quenched_variance_decreasing", decreasing && c.n_grid.len() >= 2, tracked.len() as u64));
    Ok(report)
}
