//! The generating-function chain `G_{t+1} → G_t → … → G_k` for a fixed
//! `(t, k)`, exact class counts, and a brute-force enumeration oracle.
//!
//! Conventions: `x_1` marks vertices and `x_i` marks `i`-cliques. A rooted
//! series at level `j` counts structures rooted at an ordered `j`-clique and
//! its `x_i` exponents exclude the sub-cliques of the root. Rooted series are
//! truncated at `x_1^N` (non-root vertices); the unrooted `G_j` at
//! `x_1^{N+j}` (all vertices).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::chordal::graph::{binom, mask_connectivity, ChordalGraph};
use crate::error::{Error, Result};
use crate::par;
use crate::series::{Coeff, MultiSeries, Var};

/// Which clique variables are carried symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tracking {
    /// `x_1` plus the clique variables `x_k..x_j` the descent needs at level
    /// `j`; all others are specialized to 1 as soon as they are no longer
    /// needed.
    Minimal,
    /// Every clique variable `x_2..x_t` is kept throughout.
    Full,
}

/// How far down the final level `k` is expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainDepth {
    /// Stop at the kernel `G_{k+1}^{(k)}` and the decoration series.
    Kernel,
    /// Also solve for the rooted `G_k^{(k)}` with `x_k` specialized to 1.
    Rooted,
    /// Everything, including the unrooted `G_k`.
    Complete,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainConfig {
    pub t: usize,
    pub k: usize,
    pub order: usize,
    pub tracking: Tracking,
    pub depth: ChainDepth,
    /// Order of the decoration series in `x_1` (defaults to `order`).
    pub decoration_order: Option<usize>,
}

impl ChainConfig {
    pub fn new(t: usize, k: usize, order: usize) -> Self {
        ChainConfig { t, k, order, tracking: Tracking::Minimal, depth: ChainDepth::Complete, decoration_order: None }
    }

    pub fn tracking(mut self, tracking: Tracking) -> Self {
        self.tracking = tracking;
        self
    }

    pub fn depth(mut self, depth: ChainDepth) -> Self {
        self.depth = depth;
        self
    }

    pub fn decoration_order(mut self, order: usize) -> Self {
        self.decoration_order = Some(order);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.t {
            return Err(Error::Config(format!("need 1 <= k <= t, got t={}, k={}", self.t, self.k)));
        }
        if self.t > 6 {
            return Err(Error::Config(format!("t={} beyond the supported envelope", self.t)));
        }
        if self.order < 1 {
            return Err(Error::Config("order must be at least 1".into()));
        }
        Ok(())
    }

    /// Variables carried at level `j` (`k ≤ j ≤ t + 1`).
    pub fn tracked(&self, j: usize) -> Vec<Var> {
        let top = j.min(self.t);
        let mut v = vec![Var::X(1)];
        for i in 2..=self.t {
            let keep = match self.tracking {
                Tracking::Full => true,
                Tracking::Minimal => i >= self.k && i <= top,
            };
            if keep {
                v.push(Var::X(i as u8));
            }
        }
        v
    }

    /// Safe bound for the clique variable `x_i`: never binding for graphs
    /// within the vertex truncation.
    pub fn clique_bound(&self, i: usize) -> u32 {
        (binom(self.t as u64 + 1, i as u64) * (self.order as u64 + self.t as u64 + 2)) as u32
    }

    fn bounds_for(&self, vars: &[Var], x1: u32) -> Vec<u32> {
        vars.iter()
            .map(|v| match v {
                Var::X(1) => x1,
                Var::X(i) => self.clique_bound(*i as usize),
                _ => 0,
            })
            .collect()
    }
}

/// Series attached to one level `j` of the chain.
#[derive(Clone, Debug)]
pub struct Level<C: Coeff> {
    pub j: usize,
    /// `G_j` (unrooted), when computed.
    pub unrooted: Option<MultiSeries<C>>,
    /// `G_j^{(j)}`, rooted at an ordered `j`-clique.
    pub rooted: Option<MultiSeries<C>>,
    /// `log G_j^{(j)}`: a single component hanging at the root `j`-clique.
    pub composite: Option<MultiSeries<C>>,
    /// `G_{j+1}^{(j)}`: one `(j+1)`-connected piece rooted at a `j`-clique.
    pub core: Option<MultiSeries<C>>,
}

/// The chain of series for fixed `(t, k)`. `scale` multiplies the vertex
/// variable: the stored series are `G(scale·x_1, …)`, which keeps float
/// coefficients in range near the singularity. Exact chains use scale 1.
#[derive(Clone, Debug)]
pub struct GFChain<C: Coeff = BigRational> {
    pub config: ChainConfig,
    pub scale: C,
    levels: Vec<Level<C>>,
    decorations: MultiSeries<C>,
}

impl<C: Coeff> GFChain<C> {
    pub fn build(config: ChainConfig, scale: C) -> Result<Self> {
        config.validate()?;
        let (t, k, n) = (config.t, config.k, config.order as u32);
        let x1 = Var::X(1);
        let inv_scale = C::one().div(&scale);
        let mut levels: Vec<Level<C>> = Vec::new();

        let top_vars = config.tracked(t);
        let powers: Vec<(Var, u32)> = top_vars
            .iter()
            .map(|&v| match v {
                Var::X(i) => (v, binom(t as u64 + 1, i as u64) as u32),
                _ => (v, 0),
            })
            .collect();
        let top_coeff = scale.pow(t as u32 + 1).div(&C::from_int(factorial_u64(t + 1) as i64));
        let top = MultiSeries::monomial(
            &top_vars,
            &config.bounds_for(&top_vars, n + t as u32 + 1),
            &powers,
            top_coeff,
        )?;
        levels.push(Level { j: t + 1, unrooted: Some(top), rooted: None, composite: None, core: None });

        let mut decorations = None;
        for j in (k..=t).rev() {
            let above = levels.last().unwrap().unrooted.clone().expect("unrooted series above");
            let core = rooting(&config, &above, j, &inv_scale)?;
            let mut level = Level { j, unrooted: None, rooted: None, composite: None, core: Some(core.clone()) };
            if j == k {
                let dec_order = config.decoration_order.unwrap_or(config.order).min(config.order) as u32;
                decorations = Some(core.truncate(x1, dec_order)?.exp()?);
                if config.depth == ChainDepth::Kernel {
                    levels.push(level);
                    break;
                }
            }
            let track_root = !(j == k && j >= 2 && config.depth == ChainDepth::Rooted);
            let (y, phi) = solve_implicit(&core, j, n as usize, track_root)?;
            if j > k || config.depth == ChainDepth::Complete {
                let mut g = y.integrate_extend(Var::X(j as u8))?;
                if j >= 2 {
                    g = g.shift(x1, j as i64)?;
                    for v in config.tracked(j) {
                        if let Var::X(i) = v {
                            let i = i as usize;
                            if i >= 2 && i < j {
                                g = g.shift(v, binom(j as u64, i as u64) as i64)?;
                            }
                        }
                    }
                }
                let c = scale.pow(j as u32).div(&C::from_int(factorial_u64(j) as i64));
                level.unrooted = Some(g.scale(&c));
            }
            level.rooted = Some(y);
            level.composite = Some(phi);
            levels.push(level);
        }
        Ok(GFChain { config, scale, levels, decorations: decorations.expect("final level reached") })
    }

    pub fn level(&self, j: usize) -> Result<&Level<C>> {
        self.levels
            .iter()
            .find(|l| l.j == j)
            .ok_or_else(|| Error::Range(format!("level {j} not in chain")))
    }

    /// The kernel `G_{k+1}^{(k)}`.
    pub fn kernel(&self) -> &MultiSeries<C> {
        self.level(self.config.k).unwrap().core.as_ref().unwrap()
    }

    /// `exp(G_{k+1}^{(k)})`: decorations of a black tree vertex.
    pub fn decorations(&self) -> &MultiSeries<C> {
        &self.decorations
    }

    /// `G_k^{(k)}` at the final level.
    pub fn rooted(&self) -> Result<&MultiSeries<C>> {
        self.level(self.config.k)?
            .rooted
            .as_ref()
            .ok_or_else(|| Error::Config("chain built without the rooted final level".into()))
    }

    pub fn unrooted(&self) -> Result<&MultiSeries<C>> {
        self.level(self.config.k)?
            .unrooted
            .as_ref()
            .ok_or_else(|| Error::Config("chain built without the unrooted final level".into()))
    }

    /// `[x_1^n]` of the rooted final series with all other variables at 1.
    pub fn rooted_coefficient(&self, n: usize) -> Result<C> {
        let r = self.rooted()?;
        if n as u32 > r.bound(Var::X(1))? {
            return Err(Error::Range(format!("n={n} beyond chain order")));
        }
        r.marginal(Var::X(1), n as u32)
    }

    pub fn unrooted_coefficient(&self, n: usize) -> Result<C> {
        let g = self.unrooted()?;
        if n as u32 > g.bound(Var::X(1))? {
            return Err(Error::Range(format!("n={n} beyond chain order")));
        }
        g.marginal(Var::X(1), n as u32)
    }
}

/// `G_{j+1}^{(j)} = j!·Π_{i<j} x_i^{-C(j,i)}·∂_{x_j} G_{j+1}`, with the
/// variables no longer needed at level `j` specialized to 1.
fn rooting<C: Coeff>(config: &ChainConfig, above: &MultiSeries<C>, j: usize, inv_scale: &C) -> Result<MultiSeries<C>> {
    let x1 = Var::X(1);
    let n = config.order as u32;
    let mut d = above.differentiate(Var::X(j as u8))?;
    if j >= 2 {
        d = d.shift(x1, -(j as i64))?;
        for v in d.vars().to_vec() {
            if let Var::X(i) = v {
                let i = i as usize;
                if i >= 2 && i < j {
                    d = d.shift(v, -(binom(j as u64, i as u64) as i64))?;
                }
            }
        }
    }
    d = d.truncate(x1, n)?;
    d.meta.boundary_loss.clear();
    let c = C::from_int(factorial_u64(j) as i64).mul(&inv_scale.pow(j as u32));
    let mut core = d.scale(&c);
    let keep = config.tracked(j);
    for v in core.vars().to_vec() {
        if !keep.contains(&v) {
            core = core.specialize(v, &C::one())?;
        }
    }
    Ok(core)
}

/// Algebra of the graded slices used by [`solve_implicit`].
trait Slice<C: Coeff>: Clone {
    fn is_zero(&self) -> bool;
    fn mul_acc(&mut self, a: &Self, b: &Self);
    fn mul_int(&self, m: i64) -> Self;
    fn div_int(&self, m: i64) -> Self;
}

#[derive(Clone)]
struct Scalar<C>(C);

impl<C: Coeff> Slice<C> for Scalar<C> {
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    #[inline]
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        self.0.mul_add_assign(&a.0, &b.0);
    }
    fn mul_int(&self, m: i64) -> Self {
        Scalar(self.0.mul_int(m))
    }
    fn div_int(&self, m: i64) -> Self {
        Scalar(self.0.div_int(m))
    }
}

impl<C: Coeff> Slice<C> for MultiSeries<C> {
    fn is_zero(&self) -> bool {
        self.is_empty()
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        if a.is_empty() || b.is_empty() {
            return;
        }
        let p = a.mul(b).expect("slices share a shape");
        *self = self.add(&p).expect("slices share a shape");
    }
    fn mul_int(&self, m: i64) -> Self {
        self.scale(&C::from_int(m))
    }
    fn div_int(&self, m: i64) -> Self {
        self.scale(&C::one().div(&C::from_int(m)))
    }
}

/// Online propagation of `Y = exp(S)`, `S_N = Σ_{n≥1} Σ_m W_{n,m}·(Y^m)_{N−n}`,
/// graded by the `x_1` degree. `terms[n]` lists `(m, W_{n,m})`.
fn propagate<C: Coeff, S: Slice<C>>(terms: &[Vec<(usize, S)>], n_max: usize, zero: S, one: S) -> (Vec<S>, Vec<S>) {
    // Largest power still needed once degree N has been reached.
    let mut need = vec![0usize; n_max + 2];
    let mut running = 0usize;
    for n in (0..=n_max).rev() {
        // need[N] = max m over terms with n ≤ n_max − N
        let idx = n_max - n;
        if let Some(ts) = terms.get(idx) {
            for (m, _) in ts {
                running = running.max(*m);
            }
        }
        need[n] = running;
    }
    let mut y: Vec<S> = Vec::with_capacity(n_max + 1);
    let mut s: Vec<S> = Vec::with_capacity(n_max + 1);
    // powers[m][N] = (Y^m)_N; powers[0] is the unit.
    let mut powers: Vec<Vec<S>> = vec![Vec::new(); need[0].max(1) + 1];
    for big_n in 0..=n_max {
        let mut s_n = zero.clone();
        for n in 1..=big_n {
            if let Some(ts) = terms.get(n) {
                for (m, w) in ts {
                    let p = &powers[*m][big_n - n];
                    if !p.is_zero() {
                        s_n.mul_acc(w, p);
                    }
                }
            }
        }
        let y_n = if big_n == 0 {
            one.clone()
        } else {
            let mut acc = zero.clone();
            for i in 1..=big_n {
                let si = if i == big_n { &s_n } else { &s[i] };
                if si.is_zero() || y[big_n - i].is_zero() {
                    continue;
                }
                acc.mul_acc(&si.mul_int(i as i64), &y[big_n - i]);
            }
            acc.div_int(big_n as i64)
        };
        s.push(s_n);
        y.push(y_n);
        powers[0].push(if big_n == 0 { one.clone() } else { zero.clone() });
        if need[big_n] >= 1 {
            powers[1].push(y[big_n].clone());
        }
        for m in 2..=need[big_n] {
            let mut acc = powers[m - 1][big_n].clone();
            for i in 1..=big_n {
                if y[i].is_zero() {
                    continue;
                }
                let p = &powers[m - 1][big_n - i];
                if !p.is_zero() {
                    acc.mul_acc(&y[i], p);
                }
            }
            powers[m].push(acc);
        }
    }
    (y, s)
}

/// Solves `Y = exp(core(x_j ↦ x_j·Y))` at level `j` to order `n` in `x_1`.
/// Returns `(Y, log Y)`. With `track_root = false` (only meaningful for
/// `j ≥ 2`) the result has `x_j` specialized to 1.
fn solve_implicit<C: Coeff>(core: &MultiSeries<C>, j: usize, n: usize, track_root: bool) -> Result<(MultiSeries<C>, MultiSeries<C>)> {
    if core.len() == 1 {
        return solve_monomial(core, j, n, track_root);
    }
    let x1 = Var::X(1);
    let xj = Var::X(j as u8);
    let by_x1 = core.split(x1)?;
    if by_x1.first().is_some_and(|s| !s.is_empty()) {
        return Err(Error::Internal("kernel has a term without vertices; the recursion would not be well founded".into()));
    }
    // Slice space: remaining variables of Y once x_1 is graded out.
    let mut slice_proto = by_x1[0].clone();
    if j >= 2 && !track_root {
        slice_proto = slice_proto.specialize(xj, &C::one())?;
    }
    let mut terms: Vec<Vec<(usize, MultiSeries<C>)>> = vec![Vec::new(); n + 1];
    for (deg, slice) in by_x1.iter().enumerate().take(n + 1) {
        if slice.is_empty() {
            continue;
        }
        if j == 1 {
            terms[deg].push((deg, slice.clone()));
        } else {
            let by_xj = slice.split(xj)?;
            for (m, part) in by_xj.iter().enumerate() {
                if part.is_empty() {
                    continue;
                }
                let w = if track_root { power_part(slice, xj, m as u32)? } else { part.clone() };
                terms[deg].push((m, w));
            }
        }
    }
    let empty_vars = slice_proto.vars().is_empty();
    let (y, s) = if empty_vars {
        let sc: Vec<Vec<(usize, Scalar<C>)>> = terms
            .iter()
            .map(|ts| ts.iter().map(|(m, w)| (*m, Scalar(w.get(&[])))).collect())
            .collect();
        let (y, s) = propagate(&sc, n, Scalar(C::zero()), Scalar(C::one()));
        let lift = |v: Vec<Scalar<C>>| -> Result<MultiSeries<C>> {
            MultiSeries::from_terms(
                &[x1],
                &[n as u32],
                v.into_iter().enumerate().map(|(i, c)| (vec![i as u32], c.0)).collect(),
            )
        };
        (lift(y)?, lift(s)?)
    } else {
        let zero = MultiSeries::zero(slice_proto.vars(), slice_proto.bounds())?;
        let one = MultiSeries::constant(slice_proto.vars(), slice_proto.bounds(), C::one())?;
        let (y, s) = propagate(&terms, n, zero, one);
        (MultiSeries::join(x1, &y)?, MultiSeries::join(x1, &s)?)
    };
    Ok((y, s))
}

/// Closed form for a single-monomial core `c·M`: with `p` the exponent of
/// the substituted variable, `Y = exp(c·M·Y^p)` has
/// `[M^m] Y = c^m (pm+1)^{m−1}/m!` and `[M^m] log Y = c^m p (pm)^{m−2}/(m−1)!`.
fn solve_monomial<C: Coeff>(core: &MultiSeries<C>, j: usize, n: usize, track_root: bool) -> Result<(MultiSeries<C>, MultiSeries<C>)> {
    let (e, c) = core.terms().next().map(|(e, c)| (e.clone(), c.clone())).expect("one term");
    let x1 = Var::X(1);
    let xj = Var::X(j as u8);
    let alpha = e[core.index_of(x1)?];
    if alpha == 0 {
        return Err(Error::Internal("kernel has a term without vertices; the recursion would not be well founded".into()));
    }
    let p = e[core.index_of(xj)?] as u64;
    let drop = if j >= 2 && !track_root { Some(core.index_of(xj)?) } else { None };
    let vars: Vec<Var> = core.vars().iter().copied().enumerate().filter(|(i, _)| Some(*i) != drop).map(|(_, v)| v).collect();
    let bounds: Vec<u32> = core.bounds().iter().copied().enumerate().filter(|(i, _)| Some(*i) != drop).map(|(_, b)| b).collect();
    let base: Vec<u32> = e.iter().copied().enumerate().filter(|(i, _)| Some(*i) != drop).map(|(_, x)| x).collect();
    let cf = c.to_f64();
    let int = |v: BigInt| C::from_rational(&BigRational::from_integer(v));
    let mut y_terms = Vec::new();
    let mut l_terms = Vec::new();
    let (mut y_run, mut l_run) = (1.0f64, cf);
    let mut c_pow = C::one();
    for m in 0..=(n as u64 / alpha as u64) {
        let exps: Vec<u32> = base.iter().map(|&x| x * m as u32).collect();
        if exps.iter().zip(&bounds).any(|(x, b)| x > b) {
            break;
        }
        if m == 1 {
            y_run = cf;
        } else if m >= 2 {
            let mf = m as f64;
            let pf = p as f64;
            y_run *= (cf / mf) * (pf * mf + 1.0) * ((mf - 2.0) * (pf / (pf * mf - pf + 1.0)).ln_1p()).exp();
            l_run *= (cf / (mf - 1.0)) * (pf * mf) * ((mf - 3.0) * (1.0 / (mf - 1.0)).ln_1p()).exp();
        }
        let y_m = C::exact_or_float(
            || {
                let num = if m == 0 { BigInt::one() } else { BigInt::from(p * m + 1).pow(m as u32 - 1) };
                c_pow.mul(&int(num)).div(&int(factorial(m as usize)))
            },
            y_run,
        );
        y_terms.push((exps.clone(), y_m));
        if m >= 1 {
            let l_m = C::exact_or_float(
                || {
                    if m == 1 {
                        c_pow.clone()
                    } else if p == 0 {
                        C::zero()
                    } else {
                        let num = BigInt::from(p) * BigInt::from(p * m).pow(m as u32 - 2);
                        c_pow.mul(&int(num)).div(&int(factorial(m as usize - 1)))
                    }
                },
                l_run,
            );
            if !l_m.is_zero() {
                l_terms.push((exps, l_m));
            }
        }
        c_pow = c_pow.mul(&c);
    }
    Ok((MultiSeries::from_terms(&vars, &bounds, y_terms)?, MultiSeries::from_terms(&vars, &bounds, l_terms)?))
}

/// The terms of `s` whose `v`-exponent equals `m`, keeping the variable set.
fn power_part<C: Coeff>(s: &MultiSeries<C>, v: Var, m: u32) -> Result<MultiSeries<C>> {
    let i = s.index_of(v)?;
    MultiSeries::from_terms(
        s.vars(),
        s.bounds(),
        s.terms().filter(|(e, _)| e[i] == m).map(|(e, c)| (e.clone(), c.clone())).collect(),
    )
}

pub fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

fn to_count(c: &BigRational, n: usize) -> Result<BigInt> {
    let v = c * BigRational::from_integer(factorial(n));
    if !v.is_integer() {
        return Err(Error::Internal(format!("n!·coefficient not integral at n={n}: {v}")));
    }
    Ok(v.to_integer())
}

impl GFChain<BigRational> {
    /// Exact chain (scale 1).
    pub fn exact(config: ChainConfig) -> Result<Self> {
        GFChain::build(config, <BigRational as One>::one())
    }

    /// Number of labelled graphs: unrooted with `n` vertices, or rooted at an
    /// ordered `k`-clique with `n` non-root vertices.
    pub fn count(&self, n: usize, rooted: bool) -> Result<BigInt> {
        let c = if rooted { self.rooted_coefficient(n)? } else { self.unrooted_coefficient(n)? };
        to_count(&c, n)
    }

    /// Labelled decorations with `a` non-root k-cliques and `b` vertices.
    pub fn decoration_count(&self, a: usize, b: usize) -> Result<BigInt> {
        let d = &self.decorations;
        let k = self.config.k;
        if b as u32 > d.bound(Var::X(1))? {
            return Err(Error::Range(format!("b={b} beyond decoration table")));
        }
        let c = if k == 1 {
            if a != b {
                return Ok(BigInt::zero());
            }
            d.marginal(Var::X(1), b as u32)?
        } else {
            let i1 = d.index_of(Var::X(1))?;
            let ik = d.index_of(Var::X(k as u8))?;
            if a as u32 > d.bounds()[ik] {
                return Err(Error::Range(format!("a={a} beyond decoration table")));
            }
            let mut acc = <BigRational as Zero>::zero();
            for (e, c) in d.terms() {
                if e[i1] == b as u32 && e[ik] == a as u32 {
                    acc += c;
                }
            }
            acc
        };
        to_count(&c, b)
    }

    /// Rooted, unrooted and decoration counts collected in one table.
    pub fn class_counts(&self, n_max: usize, ab_max: usize) -> Result<ClassCounts> {
        let mut unrooted = Vec::new();
        let mut rooted = Vec::new();
        for n in 0..=n_max {
            unrooted.push(self.count(n, false)?);
            rooted.push(self.count(n, true)?);
        }
        let mut decorations = BTreeMap::new();
        for b in 0..=ab_max {
            for a in 0..=ab_max {
                if let Ok(c) = self.decoration_count(a, b) {
                    if !c.is_zero() {
                        decorations.insert((a, b), c);
                    }
                }
            }
        }
        Ok(ClassCounts { unrooted, rooted, decorations })
    }

    /// Multivariate unrooted counts: map from `(n, exponents of the tracked
    /// clique variables)` to the number of labelled graphs.
    pub fn unrooted_counts_by_cliques(&self) -> Result<BTreeMap<Vec<u32>, BigInt>> {
        let g = self.unrooted()?;
        let mut out = BTreeMap::new();
        for (e, c) in g.terms() {
            out.insert(e.clone(), to_count(c, e[0] as usize)?);
        }
        Ok(out)
    }
}

/// Exact class counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassCounts {
    /// `|G_{t,k,n}|` indexed by `n`.
    pub unrooted: Vec<BigInt>,
    /// `|G^{(k)}_{k,n}|` indexed by the number of non-root vertices.
    pub rooted: Vec<BigInt>,
    /// `D(a, b)`.
    pub decorations: BTreeMap<(usize, usize), BigInt>,
}

/// Statistics of one enumerated graph (small n, bitmask form).
#[derive(Clone, Copy, Debug)]
pub struct SmallGraphStats {
    pub chordal: bool,
    pub clique_number: usize,
    pub connectivity: usize,
}

fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            v.push((a, b));
        }
    }
    v
}

fn masks_from_code(n: usize, pairs: &[(usize, usize)], code: u64) -> [u32; 16] {
    let mut adj = [0u32; 16];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if code >> i & 1 == 1 {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    let _ = n;
    adj
}

/// Chordality, clique number and connectivity of a small bitmask graph, with
/// lexicographic BFS on bitmask labels and elimination verification.
pub fn small_graph_stats(adj: &[u32], n: usize) -> SmallGraphStats {
    // LexBFS: the label of a vertex is a bitmask where visiting at step s sets
    // bit (n - s); comparing masks as integers is the lexicographic order.
    let mut label = [0u32; 16];
    let mut visited = 0u32;
    let mut order = [0usize; 16];
    for step in 0..n {
        let mut best = usize::MAX;
        for v in 0..n {
            if visited >> v & 1 == 0 && (best == usize::MAX || label[v] > label[best]) {
                best = v;
            }
        }
        visited |= 1 << best;
        order[step] = best;
        let mut nb = adj[best] & !visited;
        while nb != 0 {
            let w = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            label[w] |= 1 << (n - step);
        }
    }
    // Elimination order is the reverse visit order: vertex order[i] is
    // eliminated at position n-1-i; its later neighbours are those visited
    // before it.
    let mut before = 0u32;
    let mut chordal = true;
    let mut omega = 0usize;
    let mut pos = [0usize; 16];
    for (i, &v) in order.iter().take(n).enumerate() {
        pos[v] = i;
    }
    for i in 0..n {
        let v = order[i];
        let follow = adj[v] & before;
        omega = omega.max(follow.count_ones() as usize + 1);
        if follow != 0 {
            // parent: the later neighbour eliminated first = visited last
            let mut p = 0usize;
            let mut best = 0usize;
            let mut f = follow;
            while f != 0 {
                let w = f.trailing_zeros() as usize;
                f &= f - 1;
                if pos[w] >= best {
                    best = pos[w];
                    p = w;
                }
            }
            let rest = follow & !(1 << p);
            if rest & !adj[p] != 0 {
                chordal = false;
            }
        }
        before |= 1 << v;
    }
    let connectivity = if chordal { mask_connectivity(adj, n) } else { 0 };
    SmallGraphStats { chordal, clique_number: if n == 0 { 0 } else { omega }, connectivity }
}

fn in_class(s: &SmallGraphStats, n: usize, t: usize, k: usize, complete: bool) -> bool {
    s.chordal && n >= k && s.clique_number <= t + 1 && (s.connectivity >= k || (n == k && complete))
}

/// All labelled graphs on `n ≤ 8` vertices that are chordal, have clique
/// number at most `t + 1` and are k-connected.
pub fn brute_force_class(t: usize, k: usize, n: usize) -> Result<Vec<ChordalGraph>> {
    if n > 8 {
        return Err(Error::Resource(format!("brute force over 2^{} graphs refused", n * n.saturating_sub(1) / 2)));
    }
    let pairs = edge_pairs(n);
    let total = 1u64 << pairs.len();
    let chunks = par::chunk_ranges(total, 64);
    let found: Vec<Vec<u64>> = par::map(chunks, |(lo, hi)| {
        let mut out = Vec::new();
        for code in lo..hi {
            let adj = masks_from_code(n, &pairs, code);
            let s = small_graph_stats(&adj[..n.max(1)], n);
            if in_class(&s, n, t, k, code == total - 1) {
                out.push(code);
            }
        }
        out
    });
    Ok(found
        .into_iter()
        .flatten()
        .map(|code| {
            let edges: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| code >> i & 1 == 1)
                .map(|(_, &(a, b))| (a as u32, b as u32))
                .collect();
            ChordalGraph::from_edges(n, &edges)
        })
        .collect())
}

/// Brute-force tallies for several `(t, k)` classes at once from a single
/// sweep over all graphs on `n` vertices: for each class, the member count
/// and the sum of `n_k` over members.
pub fn brute_force_tally(classes: &[(usize, usize)], n: usize) -> Result<Vec<(u64, u64)>> {
    if n > 8 {
        return Err(Error::Resource(format!("brute force over 2^{} graphs refused", n * n.saturating_sub(1) / 2)));
    }
    let pairs = edge_pairs(n);
    let total = 1u64 << pairs.len();
    let chunks = par::chunk_ranges(total, 64);
    let parts: Vec<Vec<(u64, u64)>> = par::map(chunks, |(lo, hi)| {
        let mut acc = vec![(0u64, 0u64); classes.len()];
        for code in lo..hi {
            let adj = masks_from_code(n, &pairs, code);
            let s = small_graph_stats(&adj[..n.max(1)], n);
            if !s.chordal {
                continue;
            }
            for (c, &(t, k)) in classes.iter().enumerate() {
                if in_class(&s, n, t, k, code == total - 1) {
                    acc[c].0 += 1;
                    acc[c].1 += small_clique_count(&adj[..n.max(1)], n, k);
                }
            }
        }
        acc
    });
    let mut out = vec![(0u64, 0u64); classes.len()];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            o.0 += x.0;
            o.1 += x.1;
        }
    }
    Ok(out)
}

/// Number of `j`-cliques of a small bitmask graph, by direct enumeration.
pub fn small_clique_count(adj: &[u32], n: usize, j: usize) -> u64 {
    fn rec(adj: &[u32], cand: u32, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros();
            c &= c - 1;
            total += rec(adj, c & adj[v as usize], left - 1);
        }
        total
    }
    let all = if n == 0 { 0 } else { (1u32 << n) - 1 };
    rec(adj, all, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn top_monomial() {
        let c = GFChain::exact(ChainConfig::new(2, 1, 4).tracking(Tracking::Full)).unwrap();
        let top = c.level(3).unwrap().unrooted.as_ref().unwrap();
        assert_eq!(top.len(), 1);
        let (e, v) = top.terms().next().unwrap();
        assert_eq!(e, &vec![3, 3]);
        assert_eq!(v, &rat(1, 6));
    }

    #[test]
    fn rooted_trees() {
        let c = GFChain::exact(ChainConfig::new(1, 1, 8)).unwrap();
        for n in 0..=8usize {
            let want = BigInt::from(n + 1).pow(n.saturating_sub(1) as u32);
            let want = if n == 0 { BigInt::one() } else { want };
            assert_eq!(c.count(n, true).unwrap(), want, "n={n}");
        }
        assert_eq!(c.count(3, false).unwrap(), BigInt::from(3));
    }

    #[test]
    fn small_unrooted_counts() {
        let c = GFChain::exact(ChainConfig::new(2, 1, 6)).unwrap();
        assert_eq!(c.count(3, false).unwrap(), BigInt::from(4));
        let c = GFChain::exact(ChainConfig::new(2, 2, 6)).unwrap();
        assert_eq!(c.count(4, false).unwrap(), BigInt::from(6));
        assert_eq!(c.count(3, false).unwrap(), BigInt::from(1));
        assert_eq!(c.count(2, false).unwrap(), BigInt::from(1));
    }
}
