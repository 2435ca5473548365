//! Dominant singularity of `G_k^{(k)}`, the offspring law `(ξ, ζ)` of the
//! two-type tree, and the constants derived from them.
//!
//! All numeric work runs on a float chain whose vertex variable is scaled by
//! a coarse estimate of `ρ_k`, so that coefficients stay within range up to
//! orders of a few thousand.

use rand::Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfchain::{ChainConfig, ChainDepth, GFChain};
use crate::series::Var;

/// A value with an error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }
}

/// Sum of a series from its terms, with the geometric tail bound
/// `|T_L|·q/(1−q)` where `q` is the ratio of the last two nonzero terms,
/// clamped to `[0, 0.99]`.
#[derive(Clone, Copy, Debug, Default)]
struct TailSum {
    sum: f64,
    last: f64,
    prev: f64,
}

impl TailSum {
    fn push(&mut self, term: f64) {
        self.sum += term;
        if term != 0.0 {
            self.prev = self.last;
            self.last = term.abs();
        }
    }

    fn tail(&self) -> f64 {
        if self.prev == 0.0 {
            return 0.0;
        }
        let q = (self.last / self.prev).clamp(0.0, 0.99);
        self.last * q / (1.0 - q)
    }
}

/// Sparse copy of the scaled kernel `G_{k+1}^{(k)}`: `rows[b]` lists `(a, c)` with `c` the
/// coefficient of `x_1^b x_k^a` (for `k = 1` only `a = b` occurs and the row
/// holds a single number).
#[derive(Clone, Debug)]
struct Kernel {
    k: usize,
    scale: f64,
    rows: Vec<Vec<(u32, f64)>>,
    polynomial: bool,
}

#[derive(Clone, Copy, Debug)]
struct KernelValue {
    /// `H`
    h: f64,
    /// `y·∂_y H` (for `k = 1`: `u·F'(u)`)
    yhy: f64,
    /// `y·∂_y(y·∂_y H)` (for `k = 1`: `u·(uF')'`)
    yhy2: f64,
    /// `x·∂_x H`
    xhx: f64,
    tail: f64,
}

impl Kernel {
    fn from_chain(chain: &GFChain<f64>) -> Result<Self> {
        let kern = chain.kernel();
        let k = chain.config.k;
        let n = kern.bound(Var::X(1))? as usize;
        let mut rows = vec![Vec::new(); n + 1];
        let i1 = kern.index_of(Var::X(1))?;
        if k == 1 {
            for (e, c) in kern.terms() {
                rows[e[i1] as usize] = vec![(0, *c)];
            }
        } else {
            let ik = kern.index_of(Var::X(k as u8))?;
            for (e, c) in kern.terms() {
                rows[e[i1] as usize].push((e[ik], *c));
            }
        }
        while rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        // The kernel at k = t is the single (t+1)-clique: nothing is truncated.
        let polynomial = k == chain.config.t;
        Ok(Kernel { k, scale: chain.scale, rows, polynomial })
    }

    /// Evaluation at `x_1 = s·scale`, `x_k = y` (for `k = 1`: at `u = s·scale`).
    fn eval(&self, s: f64, y: f64) -> KernelValue {
        let (mut h, mut yhy, mut yhy2, mut xhx) = (TailSum::default(), TailSum::default(), TailSum::default(), TailSum::default());
        let (ln_s, ln_y) = (s.ln(), y.ln());
        let mut sb = 1.0;
        for (b, row) in self.rows.iter().enumerate() {
            if b > 0 && self.k == 1 {
                sb *= s;
            }
            if row.is_empty() {
                continue;
            }
            let (mut p, mut p1, mut p2) = (0.0, 0.0, 0.0);
            if self.k == 1 {
                let c = row[0].1;
                p = c;
                p1 = b as f64 * c;
                p2 = (b * b) as f64 * c;
            } else {
                // Log space: `s^b` and `y^a` may leave the f64 range separately.
                let lb = if b == 0 { 0.0 } else { b as f64 * ln_s };
                for &(a, c) in row {
                    if c > 0.0 {
                        let la = if a == 0 { 0.0 } else { a as f64 * ln_y };
                        let t = (c.ln() + lb + la).exp();
                        p += t;
                        p1 += a as f64 * t;
                        p2 += (a * a) as f64 * t;
                    }
                }
                sb = 1.0;
            }
            h.push(sb * p);
            yhy.push(sb * p1);
            yhy2.push(sb * p2);
            xhx.push(b as f64 * sb * p);
        }
        let tail = if self.polynomial { 0.0 } else { h.tail().max(yhy.tail()).max(xhx.tail()) };
        let tail = if tail.is_finite() { tail } else { f64::INFINITY };
        KernelValue { h: h.sum, yhy: yhy.sum, yhy2: yhy2.sum, xhx: xhx.sum, tail }
    }
}

/// Solution `(ρ_k, y = G_k^{(k)}(ρ_k))` of the characteristic system
/// `y = exp(H(x, y))`, `y·∂_y H(x, y) = 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Singularity {
    pub rho: Estimate,
    pub y: Estimate,
    /// `|y − exp(H(ρ, y))| / y`
    pub phi_residual: f64,
    /// `|1 − y·∂_y H(ρ, y)|`
    pub dphi_residual: f64,
    /// Series tail bound at the solution.
    pub tail: f64,
}

const TAIL_INVALID: f64 = 1e-3;

fn bisect<F: FnMut(f64) -> bool>(mut lo: f64, mut hi: f64, mut below: F) -> (f64, f64) {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Grows `hi` geometrically from `start` until `below(hi)` fails.
fn bracket<F: FnMut(f64) -> bool>(start: f64, mut below: F) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = start;
    for _ in 0..200 {
        if !below(hi) {
            return Ok((lo, hi));
        }
        lo = hi;
        hi *= 1.5;
    }
    Err(Error::Internal("no bracket for the characteristic system".into()))
}

/// Locates the dominant singularity. With `tol = None` the series tails are
/// not checked (used for a coarse bootstrap on a low-order chain).
pub fn find_singularity(chain: &GFChain<f64>, tol: Option<f64>) -> Result<Singularity> {
    let kernel = Kernel::from_chain(chain)?;
    let r = kernel.scale;
    let valid = |v: &KernelValue| tol.is_none() || (v.tail <= TAIL_INVALID && v.h.is_finite());
    let (rho, y, at, errors) = if kernel.k == 1 {
        // Fixed point y = exp(F(xy)); with u = xy the system is u·F'(u) = 1.
        let below = |s: f64| {
            let v = kernel.eval(s, 0.0);
            valid(&v) && v.yhy < 1.0
        };
        let (lo, hi) = bracket(1.0, below)?;
        let (lo, hi) = bisect(lo, hi, below);
        let s = 0.5 * (lo + hi);
        let v = kernel.eval(s, 0.0);
        let u = s * r;
        let y = v.h.exp();
        let u_err = r * (hi - lo) + u * v.tail / v.yhy2.max(f64::MIN_POSITIVE);
        let y_err = y * (u_err / u + v.tail);
        let rho = u / y;
        (rho, y, v, (rho * (u_err / u + y_err / y), y_err))
    } else {
        // For each x, y*(x) maximizes log y − H(x, y); ρ is where the maximum
        // reaches zero.
        let ystar = |s: f64| -> Option<(f64, KernelValue)> {
            let (lo, hi) = bracket(1.0, |y| {
                let v = kernel.eval(s, y);
                valid(&v) && v.yhy < 1.0
            })
            .ok()?;
            let (lo, hi) = bisect(lo, hi, |y| kernel.eval(s, y).yhy < 1.0);
            let y = 0.5 * (lo + hi);
            let v = kernel.eval(s, y);
            valid(&v).then_some((y, v))
        };
        let below = |s: f64| match ystar(s) {
            Some((y, v)) => y.ln() - v.h > 0.0,
            None => false,
        };
        let (lo, hi) = bracket(1.0, below)?;
        let (lo, hi) = bisect(lo, hi, below);
        let Some((ylo, _)) = ystar(lo) else {
            // Unresolved at every x: the truncated kernel tail is too large.
            return Err(match tol {
                Some(tol) => Error::Precision { achieved: TAIL_INVALID, requested: tol },
                None => Error::Internal("singularity lost during bisection".into()),
            });
        };
        let (y, v) = ystar(0.5 * (lo + hi)).unwrap_or((ylo, kernel.eval(lo, ylo)));
        let rho = 0.5 * (lo + hi) * r;
        let rho_err = r * (hi - lo) + rho * v.tail / v.xhx.max(f64::MIN_POSITIVE);
        let y_err = (y - ylo).abs() + y * v.tail / (v.yhy2).max(f64::MIN_POSITIVE);
        (rho, y, v, (rho_err, y_err))
    };
    if let Some(tol) = tol {
        if at.tail > tol {
            return Err(Error::Precision { achieved: at.tail, requested: tol });
        }
    }
    let phi_residual = (y - at.h.exp()).abs() / y;
    let dphi_residual = (1.0 - at.yhy).abs();
    Ok(Singularity {
        rho: Estimate::new(rho, errors.0),
        y: Estimate::new(y, errors.1),
        phi_residual,
        dphi_residual,
        tail: at.tail,
    })
}

/// Coarse singularity from a low-order unscaled chain.
fn rough(config: &ChainConfig) -> Result<Singularity> {
    let coarse = ChainConfig {
        order: config.order.min(48),
        depth: ChainDepth::Kernel,
        decoration_order: Some(0),
        ..config.clone()
    };
    find_singularity(&GFChain::<f64>::build(coarse, 1.0)?, None)
}

/// Builds a float chain scaled by `scale` (or a coarse estimate of `ρ_k`).
pub fn scaled_chain(config: ChainConfig, scale: Option<f64>) -> Result<GFChain<f64>> {
    config.validate()?;
    let scale = match scale {
        Some(s) => s,
        None => rough(&config)?.rho.value,
    };
    GFChain::<f64>::build(config, scale)
}

/// Radius of convergence of the univariate kernel, by Domb–Sykes
/// extrapolation of the last coefficient ratios to `1/b → 0`.
fn kernel_radius(chain: &GFChain<f64>) -> Option<f64> {
    let kernel = Kernel::from_chain(chain).ok()?;
    let c: Vec<(usize, f64)> = kernel
        .rows
        .iter()
        .enumerate()
        .filter_map(|(b, r)| Some(r.iter().map(|&(_, c)| c).sum::<f64>()).filter(|&v| v > 0.0).map(|v| (b, v)))
        .collect();
    let m = c.len();
    if m < 3 {
        return None;
    }
    let ((b0, c0), (b1, c1), (b2, c2)) = (c[m - 3], c[m - 2], c[m - 1]);
    if b2 - b1 != 1 || b1 - b0 != 1 {
        return None;
    }
    let (q1, q2) = (c1 / c0, c2 / c1);
    let inv = b2 as f64 * q2 - b1 as f64 * q1;
    (inv > 0.0).then(|| kernel.scale / inv)
}

/// Scale for float chains used as sampling tables: the kernel's radius in
/// `x_1` when `k < t`, else a coarse `ρ`. At this scale the coefficients of
/// every level stay within a polynomial range.
pub fn table_scale(config: &ChainConfig) -> Result<f64> {
    config.validate()?;
    let coarse = rough(config)?;
    if config.k == config.t {
        return Ok(coarse.rho.value);
    }
    let unscaled = GFChain::<f64>::build(
        ChainConfig { order: config.order.min(48), depth: ChainDepth::Kernel, decoration_order: Some(0), ..config.clone() },
        1.0,
    )?;
    Ok(kernel_radius(&unscaled).unwrap_or(coarse.rho.value * coarse.y.value))
}

/// Default cap on the bivariate decoration series for `k ≥ 2`.
pub const DECORATION_ORDER: usize = 256;

/// Kernel-depth float chain whose order is doubled from `config.order` up to
/// `max_order` until the singularity is certified to `tol`.
pub fn kernel_chain(config: ChainConfig, tol: f64, max_order: usize) -> Result<(GFChain<f64>, Singularity)> {
    config.validate()?;
    // Scaling by the kernel's own radius in x_1 (at x_k = 1) keeps high-order
    // coefficients within range; the polynomial kernel at k = t uses ρ.
    let coarse = rough(&config)?;
    let mut scale = coarse.rho.value;
    let adaptive = config.k < config.t;
    if adaptive {
        let unscaled = GFChain::<f64>::build(
            ChainConfig { order: config.order.min(48), depth: ChainDepth::Kernel, decoration_order: Some(0), ..config.clone() },
            1.0,
        )?;
        scale = kernel_radius(&unscaled).unwrap_or(coarse.rho.value * coarse.y.value);
    }
    let mut order = config.order.max(1);
    loop {
        let dec = if config.k == 1 { 0 } else { order.min(DECORATION_ORDER) };
        let cfg = ChainConfig {
            order,
            depth: ChainDepth::Kernel,
            decoration_order: Some(config.decoration_order.unwrap_or(dec).min(order)),
            ..config.clone()
        };
        let chain = GFChain::<f64>::build(cfg, scale)?;
        match find_singularity(&chain, Some(tol)) {
            Ok(sing) => return Ok((chain, sing)),
            Err(Error::Precision { .. }) if order < max_order => {
                if adaptive {
                    scale = kernel_radius(&chain).unwrap_or(scale);
                }
                order = (order * 2).min(max_order);
            }
            Err(e) => return Err(e),
        }
    }
}

/// One entry `P(ξ = xi, ζ = zeta) = p` of an offspring table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Offspring {
    pub xi: u32,
    pub zeta: u32,
    pub p: f64,
}

/// Finite table of the joint law of `(ξ, ζ)`, sorted by `(ζ, ξ)`.
#[derive(Clone, Debug, Serialize)]
pub struct OffspringLaw {
    /// Largest tabulated `ζ`.
    pub cutoff: usize,
    pub entries: Vec<Offspring>,
    /// Mass outside the table.
    pub deficit: f64,
}

impl OffspringLaw {
    pub fn from_entries(mut entries: Vec<Offspring>) -> Result<Self> {
        if entries.iter().any(|e| !(0.0..=1.0).contains(&e.p)) {
            return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = entries.iter().map(|e| e.p).sum();
        let cutoff = entries.iter().map(|e| e.zeta as usize).max().unwrap_or(0);
        entries.sort_by_key(|e| (e.zeta, e.xi));
        Ok(OffspringLaw { cutoff, entries, deficit: (1.0 - total).max(0.0) })
    }

    pub fn prob(&self, xi: u32, zeta: u32) -> f64 {
        self.entries
            .binary_search_by_key(&(zeta, xi), |e| (e.zeta, e.xi))
            .map_or(0.0, |i| self.entries[i].p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    fn moment(&self, f: impl Fn(&Offspring) -> f64) -> f64 {
        self.entries.iter().map(|e| e.p * f(e)).sum()
    }

    pub fn mean_xi(&self) -> f64 {
        self.moment(|e| e.xi as f64)
    }

    pub fn mean_zeta(&self) -> f64 {
        self.moment(|e| e.zeta as f64)
    }

    pub fn var_xi(&self) -> f64 {
        let m = self.mean_xi();
        self.moment(|e| (e.xi as f64 - m).powi(2))
    }

    pub fn var_zeta(&self) -> f64 {
        let m = self.mean_zeta();
        self.moment(|e| (e.zeta as f64 - m).powi(2))
    }

    /// `P(ξ = d)`.
    pub fn xi_marginal(&self, d: u32) -> f64 {
        self.entries.iter().filter(|e| e.xi == d).map(|e| e.p).sum()
    }

    /// Largest `ξ/ζ` ratio in the table (0 for the empty set object only).
    fn xi_per_zeta(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.zeta > 0)
            .map(|e| e.xi as f64 / e.zeta as f64)
            .fold(1.0, f64::max)
    }

    fn biased(&self, weight: impl Fn(&Offspring) -> f64) -> Vec<Offspring> {
        let total: f64 = self.entries.iter().map(|e| e.p * weight(e)).sum();
        self.entries
            .iter()
            .filter(|e| weight(e) > 0.0)
            .map(|e| Offspring { p: e.p * weight(e) / total, ..*e })
            .collect()
    }

    /// `(ξ•, ζ•)`: `P = a·P(ξ = a, ζ = b)`, renormalized over the table.
    pub fn black_biased(&self) -> Vec<Offspring> {
        self.biased(|e| e.xi as f64)
    }

    /// `(ξ°, ζ°)`: `P = b·P(ξ = a, ζ = b)/E[ζ]`, renormalized over the table.
    pub fn white_biased(&self) -> Vec<Offspring> {
        self.biased(|e| e.zeta as f64)
    }

    /// Constant-time sampler; the deficit is handled by renormalization.
    pub fn sampler(&self) -> Result<OffspringSampler> {
        OffspringSampler::new(&self.entries)
    }
}

/// Alias-method sampler over an offspring table.
#[derive(Clone, Debug)]
pub struct OffspringSampler {
    alias: WeightedAliasIndex<f64>,
    values: Vec<(u32, u32)>,
}

impl OffspringSampler {
    pub fn new(entries: &[Offspring]) -> Result<Self> {
        let kept: Vec<&Offspring> = entries.iter().filter(|e| e.p > 0.0).collect();
        let alias = WeightedAliasIndex::new(kept.iter().map(|e| e.p).collect())
            .map_err(|e| Error::Domain(format!("offspring table: {e}")))?;
        Ok(OffspringSampler { alias, values: kept.iter().map(|e| (e.xi, e.zeta)).collect() })
    }

    /// Draws `(ξ, ζ)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        self.values[self.alias.sample(rng)]
    }
}

/// Options for materializing the offspring table.
#[derive(Clone, Copy, Debug)]
pub struct LawOptions {
    /// Fixed cutoff in `ζ`; by default the smallest one at which both the
    /// mass deficit and the first-moment deficit of `ξ` are below `eps`,
    /// searched up to `max_cutoff` (bounded by the kernel order).
    pub cutoff: Option<usize>,
    pub eps: f64,
    pub max_cutoff: usize,
    /// Largest deficit accepted when `eps` is not reached within the order.
    pub max_deficit: f64,
}

impl Default for LawOptions {
    fn default() -> Self {
        LawOptions { cutoff: None, eps: 1e-12, max_cutoff: usize::MAX, max_deficit: 1e-2 }
    }
}

/// Decoration weights by `ζ`: `rows[b]` lists `(a, [x_k^a x_1^b] exp(G_{k+1}^{(k)}))`
/// in the scaled chain, up to `limit`.
fn decoration_rows(chain: &GFChain<f64>, limit: usize) -> Result<Vec<Vec<(u32, f64)>>> {
    let k = chain.config.k;
    if k == 1 {
        // Dense exponential of the univariate kernel: D_n = (1/n)·Σ i·f_i·D_{n−i}.
        let kernel = Kernel::from_chain(chain)?;
        let limit = limit.min(chain.config.order);
        let f: Vec<f64> = (0..=limit).map(|i| kernel.rows.get(i).and_then(|r| r.first()).map_or(0.0, |&(_, c)| c)).collect();
        let mut d = vec![0.0; limit + 1];
        d[0] = 1.0;
        for n in 1..=limit {
            let mut acc = 0.0;
            for i in 1..=n {
                if f[i] != 0.0 {
                    acc += i as f64 * f[i] * d[n - i];
                }
            }
            d[n] = acc / n as f64;
        }
        return Ok(d.into_iter().enumerate().map(|(b, v)| vec![(b as u32, v)]).collect());
    }
    let dec = chain.decorations();
    let order = dec.bound(Var::X(1))? as usize;
    if limit > order {
        return Err(Error::Range(format!("cutoff {limit} exceeds decoration order {order}")));
    }
    let i1 = dec.index_of(Var::X(1))?;
    let ik = dec.index_of(Var::X(k as u8))?;
    let mut rows = vec![Vec::new(); limit + 1];
    for (e, c) in dec.terms() {
        if (e[i1] as usize) <= limit {
            rows[e[i1] as usize].push((e[ik], *c));
        }
    }
    Ok(rows)
}

/// `P(ξ = a, ζ = b) = [x_k^a x_1^b] exp(G_{k+1}^{(k)}) · ρ^b · y^{a−1}`.
pub fn offspring_law(chain: &GFChain<f64>, sing: &Singularity, opts: LawOptions) -> Result<OffspringLaw> {
    let order = if chain.config.k == 1 {
        chain.config.order
    } else {
        chain.decorations().bound(Var::X(1))? as usize
    };
    let limit = opts.cutoff.unwrap_or(opts.max_cutoff.min(order));
    if limit > order {
        return Err(Error::Range(format!("cutoff {limit} exceeds chain order {order}")));
    }
    let rows = decoration_rows(chain, limit)?;
    let ratio = sing.rho.value / chain.scale;
    let (ln_ratio, ln_y) = (ratio.ln(), sing.y.value.ln());
    let mut entries = Vec::new();
    let (mut total, mut first) = (0.0, 0.0);
    let mut cutoff = limit;
    for (b, row) in rows.iter().enumerate() {
        for &(a, c) in row {
            if c <= 0.0 {
                continue;
            }
            let p = (c.ln() + b as f64 * ln_ratio + (a as f64 - 1.0) * ln_y).exp();
            if p > 0.0 {
                total += p;
                first += a as f64 * p;
                entries.push(Offspring { xi: a, zeta: b as u32, p });
            }
        }
        // Criticality makes E[ξ] = 1, so 1 − Σ a·P is the first-moment deficit.
        if opts.cutoff.is_none() && 1.0 - total < opts.eps && 1.0 - first < opts.eps {
            cutoff = b;
            break;
        }
    }
    let deficit = (1.0 - total).max(0.0);
    if deficit > opts.eps.max(opts.max_deficit) {
        return Err(Error::Range(format!(
            "offspring deficit {deficit:e} exceeds {:e} at cutoff {cutoff}; increase the cutoff",
            opts.max_deficit
        )));
    }
    entries.sort_by_key(|e| (e.zeta, e.xi));
    Ok(OffspringLaw { cutoff, entries, deficit })
}

/// `P(#₂T = n) = [x^n] G_k^{(k)}(x) · ρ^n / y`.
pub fn size_probability(chain: &GFChain<f64>, sing: &Singularity, n: usize) -> Result<f64> {
    let c = chain.rooted_coefficient(n)?;
    Ok(c * (sing.rho.value / chain.scale).powi(n as i32) / sing.y.value)
}

/// The limit of `n^{3/2}·P(#₂T = n)`, extrapolated from `n = order/2` and
/// `n = order` assuming a `1/n` correction.
pub fn size_prob_constant(chain: &GFChain<f64>, sing: &Singularity) -> Result<Estimate> {
    let n1 = chain.config.order;
    let n0 = n1 / 2;
    let v = |n: usize| -> Result<f64> { Ok((n as f64).powf(1.5) * size_probability(chain, sing, n)?) };
    let (v0, v1) = (v(n0)?, v(n1)?);
    Ok(Estimate::new(2.0 * v1 - v0, (v1 - v0).abs()))
}

/// All constants reported for a class.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticConstants {
    pub t: usize,
    pub k: usize,
    pub order: usize,
    pub kernel_order: usize,
    pub rho: Estimate,
    pub y: Estimate,
    pub mean_xi: Estimate,
    pub mean_zeta: Estimate,
    pub var_xi: Estimate,
    pub var_zeta: Estimate,
    pub kappa_tree: Estimate,
    pub size_prob_constant: Estimate,
    pub phi_residual: f64,
    pub dphi_residual: f64,
    pub cutoff: usize,
    pub deficit: f64,
}

/// Moment fields of the constants, with the deficit propagated into the
/// error bars.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TreeConstants {
    pub mean_xi: Estimate,
    pub mean_zeta: Estimate,
    pub var_xi: Estimate,
    pub var_zeta: Estimate,
    pub kappa_tree: Estimate,
}

pub fn tree_constants(law: &OffspringLaw) -> TreeConstants {
    let d = law.deficit;
    let reach = (law.cutoff + 1) as f64 * 2.0;
    let xreach = reach * law.xi_per_zeta();
    let rounding = 1e-14;
    let mean_xi = Estimate::new(law.mean_xi(), d * xreach + rounding);
    let mean_zeta = Estimate::new(law.mean_zeta(), d * reach + rounding);
    let var_xi = Estimate::new(law.var_xi(), d * xreach * xreach + rounding);
    let var_zeta = Estimate::new(law.var_zeta(), d * reach * reach + rounding);
    let kappa = (var_xi.value * mean_zeta.value).sqrt() / 2.0;
    let kappa_err = if kappa > 0.0 {
        kappa * 0.5 * (var_xi.error / var_xi.value + mean_zeta.error / mean_zeta.value)
    } else {
        0.0
    };
    TreeConstants { mean_xi, mean_zeta, var_xi, var_zeta, kappa_tree: Estimate::new(kappa, kappa_err) }
}

/// Settings for [`Analysis`].
#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub t: usize,
    pub k: usize,
    /// Order of the rooted and unrooted count series.
    pub order: usize,
    /// Requested bound on the series tails at the singularity.
    pub tol: f64,
    /// Initial and largest order of the kernel chain.
    pub kernel_order: usize,
    pub max_kernel_order: usize,
    pub law: LawOptions,
}

impl AnalysisConfig {
    pub fn new(t: usize, k: usize, order: usize, tol: f64) -> Self {
        AnalysisConfig { t, k, order, tol, kernel_order: 256, max_kernel_order: 1 << 16, law: LawOptions::default() }
    }
}

/// Kernel chain, count chain, singularity, offspring law and constants.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Kernel-depth chain at the order needed to certify the singularity.
    pub kernel: GFChain<f64>,
    /// Complete chain for counts and size probabilities.
    pub counts: GFChain<f64>,
    pub singularity: Singularity,
    pub law: OffspringLaw,
    pub constants: AnalyticConstants,
}

impl Analysis {
    pub fn new(t: usize, k: usize, order: usize, tol: f64) -> Result<Self> {
        Analysis::with_config(AnalysisConfig::new(t, k, order, tol))
    }

    pub fn with_config(cfg: AnalysisConfig) -> Result<Self> {
        let base = ChainConfig::new(cfg.t, cfg.k, cfg.kernel_order);
        let (kernel, singularity) = kernel_chain(base, cfg.tol, cfg.max_kernel_order.max(cfg.kernel_order))?;
        let law = offspring_law(&kernel, &singularity, cfg.law)?;
        let counts = GFChain::<f64>::build(ChainConfig::new(cfg.t, cfg.k, cfg.order).depth(ChainDepth::Rooted).decoration_order(0), singularity.rho.value)?;
        let tc = tree_constants(&law);
        let size_prob_constant = size_prob_constant(&counts, &singularity)?;
        let constants = AnalyticConstants {
            t: cfg.t,
            k: cfg.k,
            order: cfg.order,
            kernel_order: kernel.config.order,
            rho: singularity.rho,
            y: singularity.y,
            mean_xi: tc.mean_xi,
            mean_zeta: tc.mean_zeta,
            var_xi: tc.var_xi,
            var_zeta: tc.var_zeta,
            kappa_tree: tc.kappa_tree,
            size_prob_constant,
            phi_residual: singularity.phi_residual,
            dphi_residual: singularity.dphi_residual,
            cutoff: law.cutoff,
            deficit: law.deficit,
        };
        Ok(Analysis { kernel, counts, singularity, law, constants })
    }

    pub fn size_probability(&self, n: usize) -> Result<f64> {
        size_probability(&self.counts, &self.singularity, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_singularity() {
        let a = Analysis::new(1, 1, 80, 1e-12).unwrap();
        let e = std::f64::consts::E;
        assert!((a.constants.rho.value - 1.0 / e).abs() < 1e-12);
        assert!((a.constants.y.value - e).abs() < 1e-11);
        assert!((a.constants.kappa_tree.value - 0.5).abs() < 1e-10);
        assert!((a.size_probability(1).unwrap() - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn two_trees_closed_form() {
        // y = exp(x y²): y = e^{1/2}, ρ = 1/(2e).
        let a = Analysis::new(2, 2, 80, 1e-12).unwrap();
        let e = std::f64::consts::E;
        assert!((a.constants.rho.value - 0.5 / e).abs() < 1e-12);
        assert!((a.constants.y.value - e.sqrt()).abs() < 1e-10);
        assert!((a.constants.mean_xi.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_sum_geometric() {
        let mut t = TailSum::default();
        for m in 0..=50 {
            t.push(0.5f64.powi(m));
        }
        assert!((t.sum - (2.0 - 0.5f64.powi(50))).abs() < 1e-15);
        assert!((t.tail() - 0.5f64.powi(50)).abs() < 1e-20);
    }
}
