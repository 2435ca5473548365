//! Graph distance against tree height: the regression estimator of the
//! distance constant on coupled samples, and the spine estimator from
//! blown-up size-biased spines.

use chordal_bgw::analytic::OffspringSampler;
use chordal_bgw::chordal::{blow_up, GraphSampler, RecursiveTables};
use chordal_bgw::par::map_range;
use chordal_bgw::trees::TwoTypeTree;
use rand::Rng;

use crate::config::{Common, Config};
use crate::error::{ExpError, Result};
use crate::report::{Output, Report, Rule, Stat, Summary};
use crate::seed::stream;
use crate::stats::{mean_stat, ols};
use crate::{analysis, fmt, judge, record_constants};

/// Pooled slope with a between-replica standard error.
fn pooled_slope(pairs: &[Vec<(f64, f64)>]) -> Result<Stat> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().flatten().copied().unzip();
    let fit = ols(&xs, &ys)?;
    let slopes: Vec<f64> = pairs
        .iter()
        .filter_map(|p| {
            let (x, y): (Vec<f64>, Vec<f64>) = p.iter().copied().unzip();
            ols(&x, &y).ok().map(|f| f.slope)
        })
        .collect();
    let se = mean_stat(&slopes).se;
    Ok(Stat::new(fit.slope, se, xs.len() as u64))
}

/// Distances from vertex 0 to the root cliques along a blown-up spine of
/// `len` biased black vertices; off-spine children are left undecorated,
/// which does not change distances across the gluing cliques.
fn spine_distances<R: Rng + ?Sized>(biased: &OffspringSampler, tables: &RecursiveTables, k: usize, len: u32, rng: &mut R) -> Result<Vec<u32>> {
    let (mut xi, mut zeta) = (Vec::new(), Vec::new());
    let mut spine = Vec::with_capacity(len as usize + 1);
    let mut right = Vec::new();
    for _ in 0..len {
        spine.push(xi.len());
        let (a, b) = biased.sample(rng);
        xi.push(a);
        zeta.push(b);
        let j = rng.gen_range(0..a);
        xi.extend(std::iter::repeat_n(0, j as usize));
        zeta.extend(std::iter::repeat_n(0, j as usize));
        right.push(a - 1 - j);
    }
    spine.push(xi.len());
    xi.push(0);
    zeta.push(0);
    for &r in right.iter().rev() {
        xi.extend(std::iter::repeat_n(0, r as usize));
        zeta.extend(std::iter::repeat_n(0, r as usize));
    }
    let tree = TwoTypeTree::from_preorder(xi, zeta)?;
    let decorations = (0..tree.black_count() as u32)
        .map(|v| tables.decoration(tree.xi(v), tree.zeta(v), rng))
        .collect::<chordal_bgw::Result<Vec<_>>>()?;
    let b = blow_up(&tree, &decorations, k)?;
    let dist = b.graph.bfs(0);
    Ok(spine.iter().map(|&v| b.black_clique[v].iter().map(|&u| dist[u as usize]).min().unwrap_or(0)).collect())
}

pub fn run(cfg: &Config, out: &Output) -> Result<Report> {
    let c = Common::from_config(cfg)?;
    let threshold: u32 = cfg.get_or("height_threshold", 10)?;
    let epsilon: f64 = cfg.get_or("epsilon", 0.2)?;
    let spine_length: u32 = cfg.get_or("spine_length", 100)?;
    let spine_replicas: usize = cfg.get_or("spine_replicas", c.replicas)?;
    if spine_length < threshold + 3 {
        return Err(ExpError::Config("spine_length must exceed height_threshold by at least 3".into()));
    }
    let a = analysis(&c)?;
    let n_max = *c.n_grid.last().unwrap();
    let agreement_n: usize = cfg.get_or("agreement_n", n_max)?;
    let band_n: usize = cfg.get_or("band_n", n_max)?;
    if !c.n_grid.contains(&agreement_n) || !c.n_grid.contains(&band_n) {
        return Err(ExpError::Config("agreement_n and band_n must be in n_grid".into()));
    }
    let sampler = GraphSampler::with_analysis(&a, n_max)?;
    let mut report = Report::new("distance", cfg, c.seed);
    record_constants(&mut report, &a);

    let mut rows = Vec::new();
    let mut gammas = std::collections::BTreeMap::new();
    let mut bands = std::collections::BTreeMap::new();
    let mut identity = true;
    for &n in &c.n_grid {
        let per = map_range(c.execution, c.replicas, |r| -> Result<(Vec<(f64, f64)>, bool)> {
            let mut rng = stream(c.seed, "distance", n as u64, r as u64);
            let (tree, b) = sampler.blown_up(n as u32, &mut rng)?;
            let dist = b.graph.bfs(0);
            let mut pairs = Vec::new();
            let mut equal = true;
            for (i, &v) in b.white_vertex.iter().enumerate() {
                let ht = tree.white_height(tree.white(i as u64));
                let hg = dist[v as usize];
                equal &= ht == hg;
                if ht >= threshold {
                    pairs.push((ht as f64, hg as f64));
                }
            }
            Ok((pairs, equal))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        identity &= per.iter().all(|p| p.1);
        let pairs: Vec<Vec<(f64, f64)>> = per.into_iter().map(|p| p.0).collect();
        let points: usize = pairs.iter().map(Vec::len).sum();
        let mut s = Summary::new(n);
        s.put("high_vertices", Stat::new(points as f64, None, c.replicas as u64));
        if points < 3 {
            report.notes.push(format!("n = {n}: only {points} vertices above height {threshold}; regression skipped"));
            report.summaries.push(s);
            continue;
        }
        let gamma = pooled_slope(&pairs)?;
        let outside = pairs
            .iter()
            .flatten()
            .filter(|&&(ht, hg)| (hg - gamma.value * ht).abs() > epsilon * gamma.value * ht)
            .count();
        let band = Stat::new(outside as f64 / points as f64, None, points as u64);
        s.put("gamma_regression", gamma);
        s.put("band_exceedance", band);
        gammas.insert(n, gamma);
        bands.insert(n, band);
        rows.push(vec![n.to_string(), fmt(gamma.value), fmt(gamma.se.unwrap_or(f64::NAN)), fmt(outside as f64 / points as f64), points.to_string()]);
        report.summaries.push(s);
    }
    out.table(&mut report, "regression", &["n", "gamma", "gamma_se", "band_exceedance", "points"], &rows)?;
    let (Some(&gamma), Some(&band)) = (gammas.get(&agreement_n), bands.get(&band_n)) else {
        return Err(ExpError::Config("too few high vertices at agreement_n or band_n".into()));
    };

    let biased = OffspringSampler::new(&a.law.black_biased())?;
    let spines = map_range(c.execution, spine_replicas, |r| -> Result<Vec<(f64, f64)>> {
        let mut rng = stream(c.seed, "distance-spine", spine_length as u64, r as u64);
        let d = spine_distances(&biased, &sampler.tables, c.k, spine_length, &mut rng)?;
        Ok(d.iter().enumerate().skip(threshold as usize).map(|(l, &x)| (l as f64, x as f64)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let spine_rows: Vec<Vec<String>> = spines
        .iter()
        .enumerate()
        .flat_map(|(r, p)| p.iter().map(move |&(l, d)| vec![r.to_string(), l.to_string(), d.to_string()]))
        .collect();
    out.table(&mut report, "spine", &["replica", "level", "distance"], &spine_rows)?;
    let gamma_spine = pooled_slope(&spines)?;
    report.constant("gamma_regression", gamma);
    report.constant("gamma_spine", gamma_spine);
    let kappa = a.constants.kappa_tree.value / gamma.value;
    report.constant("kappa", Stat::new(kappa, gamma.se.map(|e| kappa * e / gamma.value), gamma.samples));

    let rel = (gamma.value - gamma_spine.value).abs() / gamma_spine.value;
    let rel_se = rel.is_finite().then(|| {
        let a = gamma.se.unwrap_or(0.0) / gamma.value;
        let b = gamma_spine.se.unwrap_or(0.0) / gamma_spine.value;
        (a * a + b * b).sqrt()
    });
    judge(&mut report, cfg, "gamma_agreement", Stat::new(rel, rel_se, gamma.samples), None, Rule::Below)?;
    judge(&mut report, cfg, "band_exceedance", band, None, Rule::Below)?;
    if c.t == 1 {
        report.check(crate::Check::holds("height_identity", identity, c.replicas as u64));
        judge(&mut report, cfg, "gamma_identity", gamma, Some(1.0), Rule::AbsWithin)?;
    }
    Ok(report)
}
