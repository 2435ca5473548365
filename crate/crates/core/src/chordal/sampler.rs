//! Uniform samplers for the class `G_{t,k}`.
//!
//! Both modes share one set of log-count tables read off a chain. The
//! recursive method draws every rooted structure directly; the blow-up mode
//! draws a conditioned two-type tree and replaces each black vertex by an
//! independent uniform decoration. Vertex labels are assigned at the end by a
//! uniform permutation of the non-root vertices.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::analytic::{table_scale, Analysis, AnalysisConfig};
use crate::chordal::graph::{binom, ChordalGraph};
use crate::error::{Error, Result};
use crate::gfchain::{ChainConfig, ChainDepth, GFChain};
use crate::series::{Coeff, Exponents, MultiSeries, Var};
use crate::trees::{ConditionedSampler, TwoTypeTree};

/// Largest order for which tables come from the exact chain.
pub const EXACT_TABLE_ORDER: usize = 40;

/// Attempt budget for one conditioned tree.
const TREE_ATTEMPTS: u64 = 10_000_000;

/// Allowed gap, in log space, between a categorical total and its target.
const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SampleMode {
    /// Conditioned tree plus independent decorations.
    BlowupRejection,
    /// Recursive method over the rooted count tables.
    RecursiveExact,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blowup-rejection" => Ok(SampleMode::BlowupRejection),
            "recursive-exact" => Ok(SampleMode::RecursiveExact),
            _ => Err(Error::Config(format!("unknown sampler mode {s:?}"))),
        }
    }
}

/// How a rooted sample is turned into an unrooted one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Deroot {
    /// Drop the root metadata.
    Forget,
    /// Accept with probability `(k(N−k)+1)/n_k`, giving uniform unrooted
    /// graphs.
    Reweight,
}

impl std::str::FromStr for Deroot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forget" => Ok(Deroot::Forget),
            "reweight" => Ok(Deroot::Reweight),
            _ => Err(Error::Config(format!("unknown de-rooting mode {s:?}"))),
        }
    }
}

/// `ln n!` for `n` up to a fixed bound.
#[derive(Clone, Debug)]
struct LnFactorials(Vec<f64>);

impl LnFactorials {
    fn new(max: usize) -> Self {
        let mut v = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        v.push(0.0);
        for i in 1..=max {
            acc += (i as f64).ln();
            v.push(acc);
        }
        LnFactorials(v)
    }

    fn get(&self, n: u32) -> f64 {
        self.0[n as usize]
    }

    fn ln_binom(&self, n: u32, m: u32) -> f64 {
        if m > n {
            f64::NEG_INFINITY
        } else {
            self.get(n) - self.get(m) - self.get(n - m)
        }
    }
}

/// Log counts of labelled structures, keyed by exponent vector. Terms are
/// sorted by their `x_1` exponent.
#[derive(Clone, Debug)]
struct LnTable {
    vars: Vec<Var>,
    i1: usize,
    terms: Vec<(Exponents, f64)>,
    /// `starts[m]` is the first term with `x_1` exponent at least `m`.
    starts: Vec<usize>,
    index: HashMap<Exponents, f64>,
}

impl LnTable {
    fn from_series<C: Coeff>(s: &MultiSeries<C>, ln_scale: f64, lnf: &LnFactorials) -> Result<Self> {
        let i1 = s.index_of(Var::X(1))?;
        let mut terms: Vec<(Exponents, f64)> = s
            .terms()
            .filter(|(_, c)| !c.is_zero() && !c.is_negative())
            .map(|(e, c)| (e.clone(), c.ln_abs() - e[i1] as f64 * ln_scale + lnf.get(e[i1])))
            .filter(|(_, v)| v.is_finite())
            .collect();
        terms.sort_by(|a, b| a.0[i1].cmp(&b.0[i1]).then_with(|| a.0.cmp(&b.0)));
        let top = terms.last().map_or(0, |t| t.0[i1] as usize);
        let mut starts = Vec::with_capacity(top + 2);
        for m in 0..=top + 1 {
            starts.push(terms.partition_point(|t| (t.0[i1] as usize) < m));
        }
        let index = terms.iter().cloned().collect();
        Ok(LnTable { vars: s.vars().to_vec(), i1, terms, starts, index })
    }

    fn get(&self, e: &[u32]) -> f64 {
        self.index.get(e).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Terms with `x_1` exponent at most `m`.
    fn up_to(&self, m: u32) -> &[(Exponents, f64)] {
        let end = self.starts.get(m as usize + 1).copied().unwrap_or(self.terms.len());
        &self.terms[..end]
    }

    /// Terms with `x_1` exponent exactly `m`.
    fn at(&self, m: u32) -> &[(Exponents, f64)] {
        let m = m as usize;
        if m + 1 >= self.starts.len() {
            return &[];
        }
        &self.terms[self.starts[m]..self.starts[m + 1]]
    }
}

fn clique_order(v: Var) -> usize {
    match v {
        Var::X(i) => i as usize,
        _ => 0,
    }
}

fn fits(e: &[u32], within: &[u32]) -> bool {
    e.iter().zip(within).all(|(a, b)| a <= b)
}

fn minus(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Draws an index with probability proportional to `exp(ln_w[i])` and checks
/// that the weights add up to `exp(target)`.
fn choose<R: Rng + ?Sized>(rng: &mut R, ln_w: &[f64], target: f64, what: &str) -> Result<usize> {
    let m = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Consistency(format!("{what}: no admissible choice")));
    }
    let w: Vec<f64> = ln_w.iter().map(|&x| (x - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let lse = m + total.ln();
    if (lse - target).abs() > CONSISTENCY_TOL {
        return Err(Error::Consistency(format!("{what}: weights total e^{lse}, expected e^{target}")));
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &x) in w.iter().enumerate() {
        if x > 0.0 {
            if u < x {
                return Ok(i);
            }
            u -= x;
            last = i;
        }
    }
    Ok(last)
}

/// The `j`-cliques of a chordal graph, each sorted, in sorted order.
pub fn cliques_of_size(g: &ChordalGraph, j: usize) -> Result<Vec<Vec<u32>>> {
    let e = g.peo().ok_or_else(|| Error::Internal("sampled piece is not chordal".into()))?;
    let mut out = Vec::new();
    for v in 0..g.n() as u32 {
        let follow = &e.follow[v as usize];
        if follow.len() + 1 < j {
            continue;
        }
        subsets(follow, j - 1, &mut |s| {
            let mut c = Vec::with_capacity(j);
            c.push(v);
            c.extend_from_slice(s);
            c.sort_unstable();
            out.push(c);
        });
    }
    out.sort();
    Ok(out)
}

fn subsets(items: &[u32], m: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(items: &[u32], m: usize, from: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for i in from..items.len() {
            if items.len() - i < m - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, m, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, m, 0, &mut Vec::with_capacity(m), f);
}

/// Tables for one level `j` of the chain.
#[derive(Clone, Debug)]
struct LevelTables {
    ij: usize,
    core: LnTable,
    rooted: Option<LnTable>,
    composite: Option<LnTable>,
    /// `Y_j^c` for `c = 0, 1, …`.
    powers: Vec<LnTable>,
    /// `G_{j+1}`, absent at `j = t`.
    above: Option<LnTable>,
}

/// A black vertex's decoration: a `k`-rooted graph whose root is `0..k` and
/// whose non-root vertices are `k..k+b`, together with its non-root
/// `k`-cliques in sorted order.
#[derive(Clone, Debug)]
pub struct Decoration {
    pub graph: ChordalGraph,
    pub cliques: Vec<Vec<u32>>,
}

/// Log-count tables of a class plus the recursive-method draws over them.
#[derive(Clone, Debug)]
pub struct RecursiveTables {
    pub t: usize,
    pub k: usize,
    pub order: usize,
    lnf: LnFactorials,
    levels: Vec<LevelTables>,
    decorations: LnTable,
    with_root: bool,
}

impl RecursiveTables {
    /// Reads the tables off a chain. `with_root` requires the rooted final
    /// level with `x_k` tracked, as needed for whole rooted graphs.
    pub fn from_chain<C: Coeff>(chain: &GFChain<C>, with_root: bool) -> Result<Self> {
        let (t, k, order) = (chain.config.t, chain.config.k, chain.config.order);
        let lnf = LnFactorials::new(order + 2 * t + 4);
        let ln_scale = chain.scale.ln_abs();
        let table = |s: &MultiSeries<C>| LnTable::from_series(s, ln_scale, &lnf);
        let mut levels = Vec::new();
        for j in k..=t {
            let level = chain.level(j)?;
            let core = level.core.as_ref().ok_or_else(|| Error::Internal(format!("level {j} has no core")))?;
            let ij = core.index_of(Var::X(j as u8))?;
            let above = if j < t {
                let g = chain.level(j + 1)?.unrooted.as_ref().ok_or_else(|| Error::Internal(format!("level {} has no unrooted series", j + 1)))?;
                Some(table(g)?)
            } else {
                None
            };
            let need_rooted = j > k || with_root;
            let (mut rooted, mut composite, mut powers) = (None, None, Vec::new());
            if need_rooted {
                let missing = || Error::Config(format!("chain lacks the rooted series at level {j}"));
                let y = level.rooted.as_ref().ok_or_else(missing)?;
                let phi = level.composite.as_ref().ok_or_else(missing)?;
                if y.vars() != core.vars() || phi.vars() != core.vars() {
                    return Err(Error::Config(format!("rooted series at level {j} does not track x_{j}")));
                }
                let c_max = core.terms().map(|(e, _)| e[ij]).max().unwrap_or(0);
                let mut p = MultiSeries::constant(y.vars(), y.bounds(), C::one())?;
                powers.push(table(&p)?);
                for _ in 0..c_max {
                    p = p.mul(y)?;
                    powers.push(table(&p)?);
                }
                rooted = Some(table(y)?);
                composite = Some(table(phi)?);
            }
            levels.push(LevelTables { ij, core: table(core)?, rooted, composite, powers, above });
        }
        let decorations = table(chain.decorations())?;
        Ok(RecursiveTables { t, k, order, lnf, levels, decorations, with_root })
    }

    /// Tables from the exact chain, or from a float chain at [`table_scale`]
    /// beyond [`EXACT_TABLE_ORDER`].
    pub fn build(t: usize, k: usize, order: usize, with_root: bool) -> Result<Self> {
        let mut config = ChainConfig::new(t, k, order);
        config = if with_root {
            config.depth(if k == 1 { ChainDepth::Rooted } else { ChainDepth::Complete })
        } else {
            config.depth(ChainDepth::Kernel)
        };
        if order <= EXACT_TABLE_ORDER {
            RecursiveTables::from_chain(&GFChain::exact(config)?, with_root)
        } else {
            let scale = table_scale(&config)?;
            RecursiveTables::from_chain(&GFChain::<f64>::build(config, scale)?, with_root)
        }
    }

    fn level(&self, j: usize) -> &LevelTables {
        &self.levels[j - self.k]
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.order {
            return Err(Error::Range(format!("n={n} beyond sampler table order {}", self.order)));
        }
        Ok(())
    }

    /// Log of the number of decorations with `a` non-root `k`-cliques and `b`
    /// non-root vertices.
    pub fn ln_decorations(&self, a: u32, b: u32) -> f64 {
        let d = &self.decorations;
        d.at(b).iter().filter(|(e, _)| self.k == 1 || e[self.level(self.k).ij] == a).map(|t| t.1).fold(f64::NEG_INFINITY, log_add)
            + if self.k == 1 && a != b { f64::NEG_INFINITY } else { 0.0 }
    }

    /// Log of the number of `k`-rooted graphs with `n` non-root vertices.
    pub fn ln_rooted(&self, n: u32) -> Result<f64> {
        let y = self.level(self.k).rooted.as_ref().ok_or_else(|| Error::Config("tables built without the rooted level".into()))?;
        Ok(y.at(n).iter().map(|t| t.1).fold(f64::NEG_INFINITY, log_add))
    }

    /// Uniform decoration with `a` non-root `k`-cliques and `b` non-root
    /// vertices.
    pub fn decoration<R: Rng + ?Sized>(&self, a: u32, b: u32, rng: &mut R) -> Result<Decoration> {
        self.check_order(b as usize)?;
        let k = self.k;
        let lt = self.level(k);
        let mut q = vec![0u32; self.decorations.vars.len()];
        q[self.decorations.i1] = b;
        if k == 1 {
            if a != b {
                return Err(Error::Domain(format!("decorations at k=1 have a = b, got a={a}, b={b}")));
            }
        } else {
            q[lt.ij] = a;
        }
        if !self.decorations.get(&q).is_finite() {
            return Err(Error::Domain(format!("no decorations with a={a}, b={b}")));
        }
        let mut g = ChordalGraph::complete(k);
        let root: Vec<u32> = (0..k as u32).collect();
        let mut cliques = Vec::new();
        let mut rest = q;
        let i1 = self.decorations.i1;
        while rest[i1] > 0 {
            let target = self.decorations.get(&rest);
            let cands: Vec<(&Exponents, f64)> = lt
                .core
                .up_to(rest[i1])
                .iter()
                .filter(|(u, _)| u[i1] >= 1 && fits(u, &rest))
                .map(|(u, lk)| (u, self.lnf.ln_binom(rest[i1] - 1, u[i1] - 1) + lk + self.decorations.get(&minus(&rest, u))))
                .collect();
            let w: Vec<f64> = cands.iter().map(|c| c.1).collect();
            let u = cands[choose(rng, &w, target, "decoration split")?].0.clone();
            cliques.extend(self.piece(k, &u, &root, &mut g, rng)?);
            rest = minus(&rest, &u);
        }
        if rest.iter().any(|&x| x != 0) {
            return Err(Error::Consistency(format!("decoration left unmatched clique counts {rest:?}")));
        }
        cliques.sort();
        g.root_clique = Some(root);
        Ok(Decoration { graph: g, cliques })
    }

    /// Uniform `k`-rooted graph with `n` non-root vertices, root `0..k`,
    /// vertices in construction order.
    pub fn rooted_graph<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<ChordalGraph> {
        if !self.with_root {
            return Err(Error::Config("tables built without the rooted level".into()));
        }
        self.check_order(n as usize)?;
        let k = self.k;
        let lt = self.level(k);
        let y = lt.rooted.as_ref().expect("rooted level present");
        let opts: Vec<&(Exponents, f64)> = y.at(n).iter().collect();
        let w: Vec<f64> = opts.iter().map(|t| t.1).collect();
        let target = w.iter().copied().fold(f64::NEG_INFINITY, log_add);
        if !target.is_finite() {
            return Err(Error::Domain(format!("no rooted graphs with {n} non-root vertices")));
        }
        let q = opts[choose(rng, &w, target, "root clique count")?].0.clone();
        let mut g = ChordalGraph::complete(k);
        let root: Vec<u32> = (0..k as u32).collect();
        self.rooted(k, q, &root, &mut g, rng)?;
        g.root_clique = Some(root);
        Ok(g)
    }

    /// A set of components hanging at `root`, with exponents `q` at level `j`.
    fn rooted<R: Rng + ?Sized>(&self, j: usize, q: Exponents, root: &[u32], g: &mut ChordalGraph, rng: &mut R) -> Result<()> {
        let lt = self.level(j);
        let y = lt.rooted.as_ref().expect("rooted level present");
        let phi = lt.composite.as_ref().expect("composite level present");
        let i1 = y.i1;
        let mut rest = q;
        while rest[i1] > 0 {
            let target = y.get(&rest);
            let cands: Vec<(&Exponents, f64)> = phi
                .up_to(rest[i1])
                .iter()
                .filter(|(u, _)| u[i1] >= 1 && fits(u, &rest))
                .map(|(u, lc)| (u, self.lnf.ln_binom(rest[i1] - 1, u[i1] - 1) + lc + y.get(&minus(&rest, u))))
                .collect();
            let w: Vec<f64> = cands.iter().map(|c| c.1).collect();
            let u = cands[choose(rng, &w, target, "component split")?].0.clone();
            self.component(j, &u, root, g, rng)?;
            rest = minus(&rest, &u);
        }
        if rest.iter().any(|&x| x != 0) {
            return Err(Error::Consistency(format!("rooted structure left unmatched counts {rest:?} at level {j}")));
        }
        Ok(())
    }

    /// One piece at `root` with a rooted structure on each new `j`-clique.
    fn component<R: Rng + ?Sized>(&self, j: usize, u: &[u32], root: &[u32], g: &mut ChordalGraph, rng: &mut R) -> Result<()> {
        let lt = self.level(j);
        let y = lt.rooted.as_ref().expect("rooted level present");
        let phi = lt.composite.as_ref().expect("composite level present");
        let i1 = y.i1;
        let cands: Vec<(&Exponents, f64)> = lt
            .core
            .up_to(u[i1])
            .iter()
            .filter(|(s, _)| s[i1] >= 1 && fits(s, u) && (s[lt.ij] as usize) < lt.powers.len())
            .map(|(s, lk)| (s, self.lnf.ln_binom(u[i1], s[i1]) + lk + lt.powers[s[lt.ij] as usize].get(&minus(u, s))))
            .collect();
        let w: Vec<f64> = cands.iter().map(|c| c.1).collect();
        let s = cands[choose(rng, &w, phi.get(u), "piece choice")?].0.clone();
        let cliques = self.piece(j, &s, root, g, rng)?;
        let c = cliques.len();
        let mut rest = minus(u, &s);
        for (i, cl) in cliques.iter().enumerate() {
            let remaining = &lt.powers[c - i - 1];
            let target = lt.powers[c - i].get(&rest);
            let cands: Vec<(&Exponents, f64)> = y
                .up_to(rest[i1])
                .iter()
                .filter(|(v, _)| fits(v, &rest))
                .map(|(v, ly)| (v, self.lnf.ln_binom(rest[i1], v[i1]) + ly + remaining.get(&minus(&rest, v))))
                .collect();
            let w: Vec<f64> = cands.iter().map(|c| c.1).collect();
            let v = cands[choose(rng, &w, target, "tuple split")?].0.clone();
            self.rooted(j, v.clone(), cl, g, rng)?;
            rest = minus(&rest, &v);
        }
        if rest.iter().any(|&x| x != 0) {
            return Err(Error::Consistency(format!("component left unmatched counts {rest:?} at level {j}")));
        }
        Ok(())
    }

    /// A single `(j+1)`-connected piece glued on `root` with exponents `s`.
    /// Returns its non-root `j`-cliques, each sorted, in sorted order.
    fn piece<R: Rng + ?Sized>(&self, j: usize, s: &[u32], root: &[u32], g: &mut ChordalGraph, rng: &mut R) -> Result<Vec<Vec<u32>>> {
        let lt = self.level(j);
        let want = s[lt.ij] as usize;
        if j == self.t {
            let w = g.add_vertex();
            for &r in root {
                g.add_edge(r, w);
            }
            let mut out: Vec<Vec<u32>> = (0..j)
                .map(|skip| {
                    let mut c: Vec<u32> = root.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    c.push(w);
                    c.sort_unstable();
                    c
                })
                .collect();
            out.sort();
            if out.len() != want {
                return Err(Error::Consistency(format!("top piece has {} cliques, expected {want}", out.len())));
            }
            return Ok(out);
        }
        let above = lt.above.as_ref().expect("level below the top has G_{j+1}");
        let core_vars = &lt.core.vars;
        let fixed: Vec<Option<u32>> = above
            .vars
            .iter()
            .map(|&v| core_vars.iter().position(|&w| w == v).map(|p| s[p] + binom(j as u64, clique_order(v) as u64) as u32))
            .collect();
        let x1 = fixed[above.i1].expect("x_1 is always tracked");
        let cands: Vec<&(Exponents, f64)> = above
            .at(x1)
            .iter()
            .filter(|(e, _)| e.iter().zip(&fixed).all(|(x, f)| f.is_none_or(|f| *x == f)))
            .collect();
        let w: Vec<f64> = cands.iter().map(|c| c.1).collect();
        let s1 = s[lt.core.i1];
        let target = lt.core.get(s) - ((want + 1) as f64).ln() - self.lnf.get(j as u32) - self.lnf.get(s1) + self.lnf.get(s1 + j as u32);
        let e = &cands[choose(rng, &w, target, "piece graph")?].0;
        let p: Exponents = above
            .vars
            .iter()
            .zip(e)
            .map(|(&v, &x)| x - binom(j as u64 + 1, clique_order(v) as u64) as u32)
            .collect();
        let mut local = ChordalGraph::complete(j + 1);
        let local_root: Vec<u32> = (0..=j as u32).collect();
        self.rooted(j + 1, p, &local_root, &mut local, rng)?;

        let all = cliques_of_size(&local, j)?;
        let pick = rng.gen_range(0..all.len());
        let mut c = all[pick].clone();
        c.shuffle(rng);
        let mut map = vec![u32::MAX; local.n()];
        for (i, &v) in c.iter().enumerate() {
            map[v as usize] = root[i];
        }
        for m in map.iter_mut() {
            if *m == u32::MAX {
                *m = g.add_vertex();
            }
        }
        for (a, b) in local.edges() {
            if c.contains(&a) && c.contains(&b) {
                continue;
            }
            g.add_edge(map[a as usize], map[b as usize]);
        }
        let mut out: Vec<Vec<u32>> = all
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pick)
            .map(|(_, cl)| {
                let mut m: Vec<u32> = cl.iter().map(|&v| map[v as usize]).collect();
                m.sort_unstable();
                m
            })
            .collect();
        out.sort();
        if out.len() != want {
            return Err(Error::Consistency(format!("piece has {} non-root {j}-cliques, expected {want}", out.len())));
        }
        Ok(out)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A blown-up tree: the graph in construction order, the vertex of every
/// white tree vertex (by depth-first white rank) and the root clique of every
/// black vertex.
#[derive(Clone, Debug)]
pub struct BlownUp {
    pub graph: ChordalGraph,
    pub white_vertex: Vec<u32>,
    pub black_clique: Vec<Vec<u32>>,
}

/// Glues the decorations along the tree: the root decoration sits on the root
/// clique `0..k`, and the `i`-th black child of a vertex is glued, root in
/// ascending order, onto the `i`-th non-root clique of its decoration.
pub fn blow_up(tree: &TwoTypeTree, decorations: &[Decoration], k: usize) -> Result<BlownUp> {
    let nb = tree.black_count();
    if decorations.len() != nb {
        return Err(Error::Domain(format!("{} decorations for {nb} black vertices", decorations.len())));
    }
    let total = k + tree.white_count() as usize;
    let mut g = ChordalGraph::complete(k);
    let mut white_vertex = Vec::with_capacity(total - k);
    let mut black_clique: Vec<Vec<u32>> = vec![Vec::new(); nb];
    black_clique[0] = (0..k as u32).collect();
    for v in 0..nb as u32 {
        let d = &decorations[v as usize];
        let b = tree.zeta(v) as usize;
        if d.graph.n() != k + b || d.cliques.len() != tree.xi(v) as usize {
            return Err(Error::Domain(format!(
                "decoration of black vertex {v} has {} vertices and {} cliques, expected {} and {}",
                d.graph.n() - k,
                d.cliques.len(),
                b,
                tree.xi(v)
            )));
        }
        let mut map = black_clique[v as usize].clone();
        for _ in 0..b {
            let w = g.add_vertex();
            map.push(w);
            white_vertex.push(w);
        }
        for (a, c) in d.graph.edges() {
            if (c as usize) < k {
                continue;
            }
            g.add_edge(map[a as usize], map[c as usize]);
        }
        for (i, &child) in tree.black_children(v).iter().enumerate() {
            black_clique[child as usize] = d.cliques[i].iter().map(|&x| map[x as usize]).collect();
        }
    }
    g.root_clique = Some((0..k as u32).collect());
    Ok(BlownUp { graph: g, white_vertex, black_clique })
}

/// Applies a uniform permutation to the vertices `fixed..n`.
pub fn relabel_uniform<R: Rng + ?Sized>(g: &ChordalGraph, fixed: usize, rng: &mut R) -> ChordalGraph {
    let mut tail: Vec<u32> = (fixed as u32..g.n() as u32).collect();
    tail.shuffle(rng);
    let perm: Vec<u32> = (0..fixed as u32).chain(tail).collect();
    g.permuted(&perm)
}

/// De-roots a rooted sample. `Reweight` may reject, in which case `None` is
/// returned and the caller draws again; accepted graphs get uniform labels on
/// all vertices.
pub fn deroot<R: Rng + ?Sized>(g: &ChordalGraph, mode: Deroot, k: usize, rng: &mut R) -> Result<Option<ChordalGraph>> {
    let mut out = match mode {
        Deroot::Forget => g.clone(),
        Deroot::Reweight => {
            let n = g.n() as u64;
            let nk = g.clique_count(k)?;
            let floor = k as u64 * (n - k as u64) + 1;
            if nk < floor {
                return Err(Error::Consistency(format!("graph has {nk} {k}-cliques, fewer than {floor}")));
            }
            if rng.gen::<f64>() * nk as f64 >= floor as f64 {
                return Ok(None);
            }
            relabel_uniform(g, 0, rng)
        }
    };
    out.root_clique = None;
    Ok(Some(out))
}

/// Sampler for `G_{t,k}` at a fixed maximum size.
#[derive(Clone, Debug)]
pub struct GraphSampler {
    pub t: usize,
    pub k: usize,
    pub mode: SampleMode,
    pub tables: RecursiveTables,
    trees: Option<ConditionedSampler>,
}

impl GraphSampler {
    /// Sampler for up to `n_max` non-root vertices. The blow-up mode needs
    /// the offspring law, computed with `tol` on the singularity.
    pub fn new(t: usize, k: usize, n_max: usize, mode: SampleMode) -> Result<Self> {
        match mode {
            SampleMode::RecursiveExact => {
                let tables = RecursiveTables::build(t, k, n_max.max(1), true)?;
                Ok(GraphSampler { t, k, mode, tables, trees: None })
            }
            SampleMode::BlowupRejection => {
                let analysis = Analysis::with_config(AnalysisConfig::new(t, k, 64, 1e-12))?;
                GraphSampler::with_analysis(&analysis, n_max)
            }
        }
    }

    /// Blow-up sampler reusing a computed offspring law.
    pub fn with_analysis(analysis: &Analysis, n_max: usize) -> Result<Self> {
        let (t, k) = (analysis.constants.t, analysis.constants.k);
        let tables = RecursiveTables::build(t, k, n_max.max(1), false)?;
        let trees = ConditionedSampler::new(&analysis.law)?;
        Ok(GraphSampler { t, k, mode: SampleMode::BlowupRejection, tables, trees: Some(trees) })
    }

    /// Blown-up conditioned tree with `n` white vertices, in construction
    /// order.
    pub fn blown_up<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<(TwoTypeTree, BlownUp)> {
        let trees = self
            .trees
            .as_ref()
            .ok_or_else(|| Error::Config("blow-up draws need the blow-up sampler".into()))?;
        let tree = if n == 0 { TwoTypeTree::root_only() } else { trees.sample(n as u64, rng, TREE_ATTEMPTS)?.0 };
        let decorations = (0..tree.black_count() as u32)
            .map(|v| self.tables.decoration(tree.xi(v), tree.zeta(v), rng))
            .collect::<Result<Vec<_>>>()?;
        let b = blow_up(&tree, &decorations, self.k)?;
        Ok((tree, b))
    }

    /// Uniform `k`-rooted graph with `n` non-root vertices, root clique
    /// `0..k`, non-root vertices uniformly labelled.
    pub fn rooted<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<ChordalGraph> {
        let g = match self.mode {
            SampleMode::RecursiveExact => self.tables.rooted_graph(n, rng)?,
            SampleMode::BlowupRejection => self.blown_up(n, rng)?.1.graph,
        };
        Ok(relabel_uniform(&g, self.k, rng))
    }

    /// Unrooted graph with `n + k` vertices. Returns the graph and the
    /// number of rooted draws used.
    pub fn unrooted<R: Rng + ?Sized>(&self, n: u32, mode: Deroot, rng: &mut R, max_attempts: u64) -> Result<(ChordalGraph, u64)> {
        for attempt in 1..=max_attempts {
            let g = self.rooted(n, rng)?;
            if let Some(h) = deroot(&g, mode, self.k, rng)? {
                return Ok((h, attempt));
            }
        }
        Err(Error::Exhausted { attempts: max_attempts, detail: "de-rooting rejections".into() })
    }
}
