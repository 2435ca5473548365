//! Sparse truncated multivariate power series.
//!
//! Coefficients are generic over [`Coeff`]; the exact default is
//! [`BigRational`], and `f64` is available for large-order numeric work.
//! Every variable carries a hard truncation bound: terms whose exponent would
//! exceed it are discarded by every operation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient ring used by [`MultiSeries`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_int(&self, n: i64) -> Self;
    fn div_int(&self, n: i64) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    fn is_negative(&self) -> bool;
    /// `ln |self|`, finite for all representable nonzero values.
    fn ln_abs(&self) -> f64;
    /// Picks the exact value in exact rings and the float value otherwise.
    fn exact_or_float(exact: impl FnOnce() -> Self, float: f64) -> Self;

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul(b);
        self.add_assign(&p);
    }

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul_int(&self, n: i64) -> Self {
        self * BigInt::from(n)
    }
    fn div_int(&self, n: i64) -> Self {
        self / BigInt::from(n)
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn ln_abs(&self) -> f64 {
        ln_abs_ratio(self).0
    }
    fn exact_or_float(exact: impl FnOnce() -> Self, _float: f64) -> Self {
        exact()
    }
}

/// Values below this magnitude are flushed to zero in the float ring so that
/// long recursions never wander into subnormal arithmetic.
const FLUSH: f64 = 1e-280;

#[inline]
fn flush(x: f64) -> f64 {
    if x.abs() < FLUSH {
        0.0
    } else {
        x
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        flush(self * other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul_int(&self, n: i64) -> Self {
        self * n as f64
    }
    fn div_int(&self, n: i64) -> Self {
        flush(self / n as f64)
    }
    fn div(&self, other: &Self) -> Self {
        flush(self / other)
    }
    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn ln_abs(&self) -> f64 {
        self.abs().ln()
    }
    fn exact_or_float(_exact: impl FnOnce() -> Self, float: f64) -> Self {
        flush(float)
    }
    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += flush(a * b);
    }
}

/// Converts a big rational to the nearest representable double, robust to
/// numerators and denominators far outside the `f64` range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || Zero::is_zero(r.numer())) {
            return v;
        }
    }
    let (ln, sign) = ln_abs_ratio(r);
    sign * ln.exp()
}

/// Natural logarithm of |r| and the sign of r (sign 0 for r = 0).
pub fn ln_abs_ratio(r: &BigRational) -> (f64, f64) {
    if Zero::is_zero(r.numer()) {
        return (f64::NEG_INFINITY, 0.0);
    }
    let sign = if Signed::is_negative(r) { -1.0 } else { 1.0 };
    (ln_abs_int(r.numer()) - ln_abs_int(r.denom()), sign)
}

/// Natural logarithm of |n| for arbitrarily large integers.
pub fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return ToPrimitive::to_f64(&n.abs()).unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    ToPrimitive::to_f64(&top).unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// A series variable: vertex/clique variables `x_1..x_t` plus the two
/// auxiliary marks `z`, `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Var {
    X(u8),
    Z,
    W,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Z => write!(f, "z"),
            Var::W => write!(f, "w"),
        }
    }
}

pub type Exponents = Vec<u32>;

/// Bookkeeping about information lost to truncation.
#[derive(Clone, Debug, Default)]
pub struct SeriesMeta {
    /// Variables whose top coefficient (at the truncation bound) is no longer
    /// reliable, because an operation dropped or could not supply it.
    pub boundary_loss: Vec<Var>,
}

impl SeriesMeta {
    fn note(&mut self, v: Var) {
        if !self.boundary_loss.contains(&v) {
            self.boundary_loss.push(v);
            self.boundary_loss.sort();
        }
    }

    fn merge(&mut self, other: &SeriesMeta) {
        for &v in &other.boundary_loss {
            self.note(v);
        }
    }
}

/// Sparse truncated power series in an ordered set of variables.
#[derive(Clone, Debug)]
pub struct MultiSeries<C: Coeff = BigRational> {
    vars: Vec<Var>,
    bounds: Vec<u32>,
    terms: BTreeMap<Exponents, C>,
    polynomial: bool,
    pub meta: SeriesMeta,
}

impl<C: Coeff> PartialEq for MultiSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.bounds == other.bounds && self.terms == other.terms
    }
}

/// Right-hand side of a substitution.
#[derive(Clone, Debug)]
pub enum Binding<C: Coeff> {
    Series(MultiSeries<C>),
    Exact(C),
    Float(f64),
}

/// Result of [`MultiSeries::substitute`].
#[derive(Clone, Debug, PartialEq)]
pub enum Substituted<C: Coeff> {
    Series(MultiSeries<C>),
    Float { value: f64, tail_bound: f64 },
}

impl<C: Coeff> MultiSeries<C> {
    /// The zero series over `vars` with the given per-variable bounds.
    pub fn zero(vars: &[Var], bounds: &[u32]) -> Result<Self> {
        if vars.len() != bounds.len() {
            return Err(Error::Config("variable and bound lists differ in length".into()));
        }
        let mut pairs: Vec<(Var, u32)> = vars.iter().copied().zip(bounds.iter().copied()).collect();
        pairs.sort();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Config(format!("duplicate variable {}", w[0].0)));
            }
        }
        Ok(MultiSeries {
            vars: pairs.iter().map(|p| p.0).collect(),
            bounds: pairs.iter().map(|p| p.1).collect(),
            terms: BTreeMap::new(),
            polynomial: false,
            meta: SeriesMeta::default(),
        })
    }

    /// A constant series.
    pub fn constant(vars: &[Var], bounds: &[u32], c: C) -> Result<Self> {
        let mut s = Self::zero(vars, bounds)?;
        let e = vec![0; s.vars.len()];
        s.insert(e, c);
        Ok(s)
    }

    /// A single term `c · Π v^e`, given as (variable, exponent) pairs.
    pub fn monomial(vars: &[Var], bounds: &[u32], powers: &[(Var, u32)], c: C) -> Result<Self> {
        let mut s = Self::zero(vars, bounds)?;
        let mut e = vec![0; s.vars.len()];
        for &(v, p) in powers {
            let i = s.index_of(v)?;
            e[i] += p;
        }
        if s.fits(&e) {
            s.insert(e, c);
        }
        Ok(s)
    }

    /// Builds a series from explicit terms; out-of-bound terms are rejected.
    pub fn from_terms(vars: &[Var], bounds: &[u32], terms: Vec<(Exponents, C)>) -> Result<Self> {
        let mut s = Self::zero(vars, bounds)?;
        if vars.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("from_terms expects variables in canonical order".into()));
        }
        for (e, c) in terms {
            if e.len() != s.vars.len() || !s.fits(&e) {
                return Err(Error::Range(format!("exponent {e:?} outside truncation")));
            }
            s.add_term(e, &c);
        }
        Ok(s)
    }

    /// Marks the series as an exact polynomial: its truncation hides no terms.
    pub fn into_polynomial(mut self) -> Self {
        self.polynomial = true;
        self
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn bound(&self, v: Var) -> Result<u32> {
        Ok(self.bounds[self.index_of(v)?])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, v: Var) -> Result<usize> {
        self.vars
            .iter()
            .position(|&u| u == v)
            .ok_or_else(|| Error::Config(format!("variable {v} not in series")))
    }

    pub fn has_var(&self, v: Var) -> bool {
        self.vars.contains(&v)
    }

    fn fits(&self, e: &[u32]) -> bool {
        e.iter().zip(&self.bounds).all(|(a, b)| a <= b)
    }

    fn insert(&mut self, e: Exponents, c: C) {
        if !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    fn add_term(&mut self, e: Exponents, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                v.add_assign(c);
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars || self.bounds != other.bounds {
            return Err(Error::Config(format!(
                "mismatched series shapes: {:?}/{:?} vs {:?}/{:?}",
                self.vars, self.bounds, other.vars, other.bounds
            )));
        }
        Ok(())
    }

    fn empty_like(&self) -> Self {
        MultiSeries {
            vars: self.vars.clone(),
            bounds: self.bounds.clone(),
            terms: BTreeMap::new(),
            polynomial: self.polynomial,
            meta: self.meta.clone(),
        }
    }

    /// Stored coefficient, or zero; out-of-truncation exponents are an error.
    pub fn coefficient(&self, e: &[u32]) -> Result<C> {
        if e.len() != self.vars.len() {
            return Err(Error::Range(format!("exponent vector {e:?} has wrong arity")));
        }
        if !self.fits(e) {
            return Err(Error::Range(format!("exponent {e:?} outside truncation {:?}", self.bounds)));
        }
        Ok(self.terms.get(e).cloned().unwrap_or_else(C::zero))
    }

    /// Coefficient lookup without the truncation check.
    pub fn get(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.polynomial &= other.polynomial;
        out.meta.merge(&other.meta);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&C::one().neg()))
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = self.empty_like();
        for (e, v) in &self.terms {
            out.insert(e.clone(), v.mul(c));
        }
        out
    }

    /// Truncated product. Both operands must share variables and bounds.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.empty_like();
        out.polynomial = self.polynomial && other.polynomial;
        out.meta.merge(&other.meta);
        let mut e = vec![0u32; self.vars.len()];
        for (ea, ca) in &self.terms {
            'inner: for (eb, cb) in &other.terms {
                for i in 0..e.len() {
                    let s = ea[i] + eb[i];
                    if s > self.bounds[i] {
                        continue 'inner;
                    }
                    e[i] = s;
                }
                out.add_term(e.clone(), &ca.mul(cb));
            }
        }
        Ok(out)
    }

    fn total_degree(e: &[u32]) -> u32 {
        e.iter().sum()
    }

    /// `exp(a)` via the Euler-operator recurrence `d·E_d = Σ j·A_j·E_{d-j}`
    /// over total degree.
    pub fn exp(&self) -> Result<Self> {
        let zero = vec![0u32; self.vars.len()];
        if self.terms.contains_key(&zero) {
            return Err(Error::Domain("exp of a series with nonzero constant term".into()));
        }
        let mut by_deg: BTreeMap<u32, Vec<(&Exponents, &C)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            by_deg.entry(Self::total_degree(e)).or_default().push((e, c));
        }
        let max_deg: u32 = self.bounds.iter().sum();
        let mut levels: Vec<BTreeMap<Exponents, C>> = vec![BTreeMap::new(); max_deg as usize + 1];
        levels[0].insert(zero, C::one());
        let mut e = vec![0u32; self.vars.len()];
        for d in 1..=max_deg {
            let mut acc: BTreeMap<Exponents, C> = BTreeMap::new();
            for (&j, terms) in by_deg.range(1..=d) {
                let prev = &levels[(d - j) as usize];
                if prev.is_empty() {
                    continue;
                }
                for &(ea, ca) in terms {
                    let wa = ca.mul_int(j as i64);
                    'inner: for (eb, cb) in prev {
                        for i in 0..e.len() {
                            let s = ea[i] + eb[i];
                            if s > self.bounds[i] {
                                continue 'inner;
                            }
                            e[i] = s;
                        }
                        acc.entry(e.clone()).or_insert_with(C::zero).mul_add_assign(&wa, cb);
                    }
                }
            }
            let lvl = &mut levels[d as usize];
            for (ex, c) in acc {
                let v = c.div_int(d as i64);
                if !v.is_zero() {
                    lvl.insert(ex, v);
                }
            }
        }
        let mut out = self.empty_like();
        out.polynomial = false;
        for lvl in levels {
            out.terms.extend(lvl);
        }
        Ok(out)
    }

    /// Integrates in `v` with zero constant of integration. Terms already at
    /// the bound of `v` cannot be raised and are dropped (recorded in `meta`).
    pub fn integrate(&self, v: Var) -> Result<Self> {
        let i = self.index_of(v)?;
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            if e[i] == self.bounds[i] {
                out.meta.note(v);
                continue;
            }
            let mut f = e.clone();
            f[i] += 1;
            out.insert(f, c.div_int(e[i] as i64 + 1));
        }
        Ok(out)
    }

    /// Integrates in `v`, raising the bound of `v` by one so nothing is lost.
    pub fn integrate_extend(&self, v: Var) -> Result<Self> {
        let i = self.index_of(v)?;
        let mut s = self.clone();
        s.bounds[i] += 1;
        s.integrate(v)
    }

    /// Differentiates in `v`. The bound is kept; the coefficient at the bound
    /// is unknown afterwards unless the series is a polynomial.
    pub fn differentiate(&self, v: Var) -> Result<Self> {
        let i = self.index_of(v)?;
        let mut out = self.empty_like();
        if !self.polynomial {
            out.meta.note(v);
        }
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.insert(f, c.mul_int(e[i] as i64));
        }
        Ok(out)
    }

    /// Lowers (never raises) the bound of `v`, discarding terms beyond it.
    pub fn truncate(&self, v: Var, bound: u32) -> Result<Self> {
        let i = self.index_of(v)?;
        let mut out = self.empty_like();
        out.bounds[i] = bound.min(self.bounds[i]);
        for (e, c) in &self.terms {
            if e[i] <= out.bounds[i] {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Multiplies by `v^delta`, shifting the bound of `v` with it. A negative
    /// shift requires every term to be divisible by `v^{-delta}`.
    pub fn shift(&self, v: Var, delta: i64) -> Result<Self> {
        let i = self.index_of(v)?;
        let nb = self.bounds[i] as i64 + delta;
        if nb < 0 {
            return Err(Error::Domain(format!("shift of {v} by {delta} leaves a negative bound")));
        }
        let mut out = self.empty_like();
        out.bounds[i] = nb as u32;
        for (e, c) in &self.terms {
            let ne = e[i] as i64 + delta;
            if ne < 0 {
                return Err(Error::Domain(format!("shift of {v} by {delta} creates a negative exponent")));
            }
            let mut f = e.clone();
            f[i] = ne as u32;
            out.terms.insert(f, c.clone());
        }
        Ok(out)
    }

    /// Substitutes an exact value for `v` and removes it from the variable set.
    pub fn specialize(&self, v: Var, value: &C) -> Result<Self> {
        let i = self.index_of(v)?;
        let mut vars = self.vars.clone();
        let mut bounds = self.bounds.clone();
        vars.remove(i);
        bounds.remove(i);
        let mut out = MultiSeries::zero(&vars, &bounds)?;
        out.polynomial = self.polynomial;
        out.meta = self.meta.clone();
        out.meta.boundary_loss.retain(|&u| u != v);
        let hits_bound = !self.polynomial && self.terms.keys().any(|e| e[i] == self.bounds[i]);
        let mut powers: Vec<C> = vec![C::one()];
        for (e, c) in &self.terms {
            while powers.len() <= e[i] as usize {
                let next = powers.last().unwrap().mul(value);
                powers.push(next);
            }
            let mut f = e.clone();
            f.remove(i);
            out.add_term(f, &c.mul(&powers[e[i] as usize]));
        }
        if hits_bound {
            for &u in &out.vars.clone() {
                out.meta.note(u);
            }
        }
        Ok(out)
    }

    /// Adds a variable (exponent zero everywhere) with the given bound.
    pub fn with_var(&self, v: Var, bound: u32) -> Result<Self> {
        if self.has_var(v) {
            return Err(Error::Config(format!("variable {v} already present")));
        }
        let mut vars = self.vars.clone();
        vars.push(v);
        vars.sort();
        let pos = vars.iter().position(|&u| u == v).unwrap();
        let mut bounds = self.bounds.clone();
        bounds.insert(pos, bound);
        let mut out = MultiSeries::zero(&vars, &bounds)?;
        out.polynomial = self.polynomial;
        out.meta = self.meta.clone();
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f.insert(pos, 0);
            out.terms.insert(f, c.clone());
        }
        Ok(out)
    }

    /// Splits by the exponent of `v`: slice `m` holds the coefficient of `v^m`
    /// as a series in the remaining variables.
    pub fn split(&self, v: Var) -> Result<Vec<MultiSeries<C>>> {
        let i = self.index_of(v)?;
        let mut vars = self.vars.clone();
        let mut bounds = self.bounds.clone();
        vars.remove(i);
        bounds.remove(i);
        let proto = MultiSeries::<C>::zero(&vars, &bounds)?;
        let mut out = vec![proto; self.bounds[i] as usize + 1];
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let m = f.remove(i);
            out[m as usize].terms.insert(f, c.clone());
        }
        Ok(out)
    }

    /// Inverse of [`split`](Self::split).
    pub fn join(v: Var, slices: &[MultiSeries<C>]) -> Result<Self> {
        let proto = slices
            .first()
            .ok_or_else(|| Error::Config("join needs at least one slice".into()))?;
        let mut vars = proto.vars.clone();
        vars.push(v);
        vars.sort();
        let pos = vars.iter().position(|&u| u == v).unwrap();
        let mut bounds = proto.bounds.clone();
        bounds.insert(pos, slices.len() as u32 - 1);
        let mut out = MultiSeries::zero(&vars, &bounds)?;
        for (m, s) in slices.iter().enumerate() {
            s.same_shape(proto)?;
            for (e, c) in &s.terms {
                let mut f = e.clone();
                f.insert(pos, m as u32);
                out.terms.insert(f, c.clone());
            }
        }
        Ok(out)
    }

    /// Sum of all coefficients whose `v`-exponent equals `m` (all other
    /// variables set to one).
    pub fn marginal(&self, v: Var, m: u32) -> Result<C> {
        let i = self.index_of(v)?;
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            if e[i] == m {
                acc.add_assign(c);
            }
        }
        Ok(acc)
    }

    /// General substitution. Exact bindings (series or values) give a series;
    /// any float binding switches to numeric evaluation, which then requires
    /// every variable to be bound to a value.
    pub fn substitute(&self, bindings: &[(Var, Binding<C>)], tol: Option<f64>) -> Result<Substituted<C>> {
        for (v, _) in bindings {
            self.index_of(*v)?;
        }
        if bindings.iter().any(|(_, b)| matches!(b, Binding::Float(_))) {
            let mut point = Vec::new();
            for &v in &self.vars {
                match bindings.iter().find(|(u, _)| *u == v).map(|p| &p.1) {
                    Some(Binding::Float(x)) => point.push((v, *x)),
                    Some(Binding::Exact(c)) => point.push((v, c.to_f64())),
                    _ => {
                        return Err(Error::Config(format!(
                            "numeric substitution needs a value for every variable; {v} is unbound"
                        )))
                    }
                }
            }
            let (value, tail_bound) = self.evaluate(&point, tol)?;
            return Ok(Substituted::Float { value, tail_bound });
        }
        let mut cur = self.clone();
        for (v, b) in bindings {
            if let Binding::Exact(c) = b {
                cur = cur.specialize(*v, c)?;
            }
        }
        let series: Vec<(Var, &MultiSeries<C>)> = bindings
            .iter()
            .filter_map(|(v, b)| match b {
                Binding::Series(s) => Some((*v, s)),
                _ => None,
            })
            .collect();
        if series.is_empty() {
            return Ok(Substituted::Series(cur));
        }
        cur.compose(&series).map(Substituted::Series)
    }

    fn compose(&self, series: &[(Var, &MultiSeries<C>)]) -> Result<Self> {
        let shape = series[0].1;
        for (v, s) in series {
            if s.vars != shape.vars || s.bounds != shape.bounds {
                return Err(Error::Config("series bindings must share variables and bounds".into()));
            }
            let zero = vec![0u32; s.vars.len()];
            if s.terms.contains_key(&zero) && !self.polynomial {
                return Err(Error::Domain(format!(
                    "binding for {v} has a constant term but the series is not a polynomial"
                )));
            }
        }
        let subst_idx: Vec<usize> = series.iter().map(|(v, _)| self.index_of(*v).unwrap()).collect();
        let mut rem_vars = Vec::new();
        let mut rem_bounds = Vec::new();
        for (i, &v) in self.vars.iter().enumerate() {
            if !subst_idx.contains(&i) {
                rem_vars.push(v);
                rem_bounds.push(self.bounds[i]);
            }
        }
        let mut vars = rem_vars.clone();
        let mut bounds = rem_bounds.clone();
        for (j, &v) in shape.vars.iter().enumerate() {
            match vars.iter().position(|&u| u == v) {
                Some(p) => bounds[p] = bounds[p].min(shape.bounds[j]),
                None => {
                    vars.push(v);
                    bounds.push(shape.bounds[j]);
                }
            }
        }
        let mut out = MultiSeries::<C>::zero(&vars, &bounds)?;
        out.polynomial = self.polynomial && series.iter().all(|(_, s)| s.polynomial);
        let lift = |s: &MultiSeries<C>, from: &[Var]| -> Result<MultiSeries<C>> {
            let mut r = MultiSeries::<C>::zero(&out.vars, &out.bounds)?;
            r.polynomial = s.polynomial;
            for (e, c) in &s.terms {
                let mut f = vec![0u32; r.vars.len()];
                for (j, &v) in from.iter().enumerate() {
                    let p = r.vars.iter().position(|&u| u == v).unwrap();
                    f[p] = e[j];
                }
                if r.fits(&f) {
                    r.add_term(f, c);
                }
            }
            Ok(r)
        };
        let lifted: Vec<MultiSeries<C>> = series
            .iter()
            .map(|(_, s)| lift(s, &s.vars))
            .collect::<Result<_>>()?;
        let mut powers: Vec<Vec<MultiSeries<C>>> = lifted
            .iter()
            .map(|s| vec![MultiSeries::constant(&out.vars, &out.bounds, C::one()).unwrap().into_polynomial(), s.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut rem = vec![0u32; out.vars.len()];
            let mut k = 0;
            for (i, &v) in self.vars.iter().enumerate() {
                if !subst_idx.contains(&i) {
                    let p = out.vars.iter().position(|&u| u == v).unwrap();
                    rem[p] = e[i];
                    k += 1;
                }
            }
            debug_assert_eq!(k, rem_vars.len());
            if !out.fits(&rem) {
                continue;
            }
            let mut term = MultiSeries::<C>::zero(&out.vars, &out.bounds)?;
            term.terms.insert(rem, c.clone());
            for (s, &i) in subst_idx.iter().enumerate() {
                let p = e[i] as usize;
                while powers[s].len() <= p {
                    let next = powers[s].last().unwrap().mul(&lifted[s])?;
                    powers[s].push(next);
                }
                term = term.mul(&powers[s][p])?;
            }
            for (f, v) in term.terms {
                out.add_term(f, &v);
            }
        }
        Ok(out)
    }

    /// Numeric evaluation at a point (one value per variable, any order).
    /// Terms are grouped by the exponent of the first variable; the tail is
    /// estimated geometrically from the last two nonzero groups.
    pub fn evaluate(&self, point: &[(Var, f64)], tol: Option<f64>) -> Result<(f64, f64)> {
        let mut vals = vec![f64::NAN; self.vars.len()];
        for &(v, x) in point {
            if let Ok(i) = self.index_of(v) {
                vals[i] = x;
            }
        }
        if let Some(i) = vals.iter().position(|x| x.is_nan()) {
            return Err(Error::Config(format!("no value for {}", self.vars[i])));
        }
        let mut sum = 0.0;
        let mut groups: BTreeMap<u32, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &p) in e.iter().enumerate() {
                t *= vals[i].powi(p as i32);
            }
            sum += t;
            let g = if e.is_empty() { 0 } else { e[0] };
            *groups.entry(g).or_insert(0.0) += t.abs();
        }
        let nonzero: Vec<(u32, f64)> = groups.into_iter().filter(|(_, m)| *m > 0.0).collect();
        let tail = if self.polynomial || nonzero.len() < 2 {
            0.0
        } else {
            let (dl, tl) = nonzero[nonzero.len() - 1];
            let (dp, tp) = nonzero[nonzero.len() - 2];
            let r = (tl / tp).powf(1.0 / (dl - dp) as f64).clamp(0.0, 0.99);
            tl * r / (1.0 - r)
        };
        if let Some(tol) = tol {
            if tail > tol {
                return Err(Error::Precision { achieved: tail, requested: tol });
            }
        }
        Ok((sum, tail))
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for MultiSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*{}", self.vars[i])?,
                    _ => write!(f, "*{}^{}", self.vars[i], p)?,
                }
            }
        }
        Ok(())
    }
}

/// Exact rational `p/q`.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Var = Var::X(1);

    fn uni(coeffs: &[BigRational], bound: u32) -> MultiSeries {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (vec![i as u32], c.clone()))
            .collect();
        MultiSeries::from_terms(&[X], &[bound], terms).unwrap()
    }

    #[test]
    fn product_by_hand() {
        let a = uni(&[rat(1, 1), rat(1, 1), rat(1, 2)], 2);
        let b = uni(&[rat(1, 1), rat(1, 1)], 2);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, uni(&[rat(1, 1), rat(2, 1), rat(3, 2)], 2));
        let c = uni(&[rat(1, 1), rat(-1, 1)], 2);
        assert_eq!(b.mul(&c).unwrap(), uni(&[rat(1, 1), rat(0, 1), rat(-1, 1)], 2));
    }

    #[test]
    fn exp_of_x_plus_x2() {
        let a = uni(&[rat(0, 1), rat(1, 1), rat(1, 1)], 3);
        let e = a.exp().unwrap();
        assert_eq!(e.coefficient(&[3]).unwrap(), rat(7, 6));
        let ex = uni(&[rat(0, 1), rat(1, 1)], 3).exp().unwrap();
        assert_eq!(ex, uni(&[rat(1, 1), rat(1, 1), rat(1, 2), rat(1, 6)], 3));
        assert!(e.coefficient(&[4]).is_err());
    }

    #[test]
    fn integrate_drops_boundary() {
        let a = uni(&[rat(0, 1), rat(2, 1), rat(3, 1)], 2);
        let i = a.integrate(X).unwrap();
        assert_eq!(i.coefficient(&[2]).unwrap(), rat(1, 1));
        assert_eq!(i.meta.boundary_loss, vec![X]);
        let j = a.integrate_extend(X).unwrap();
        assert_eq!(j, uni(&[rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1)], 3));
    }

    #[test]
    fn geometric_tail_bound() {
        let coeffs = vec![rat(1, 1); 51];
        let s = uni(&coeffs, 50);
        let (v, tail) = s.evaluate(&[(X, 0.5)], None).unwrap();
        assert!((v - (2.0 - 0.5f64.powi(50))).abs() < 1e-15);
        assert!(tail <= 0.5f64.powi(50) * (1.0 + 1e-12));
        assert!(matches!(s.evaluate(&[(X, 0.5)], Some(1e-20)), Err(Error::Precision { .. })));
    }

    #[test]
    fn polynomial_substitution() {
        let y = Var::X(2);
        let sq = MultiSeries::monomial(&[X], &[2], &[(X, 2)], rat(1, 1)).unwrap().into_polynomial();
        let b = MultiSeries::from_terms(&[y], &[2], vec![(vec![0], rat(1, 1)), (vec![1], rat(1, 1))])
            .unwrap()
            .into_polynomial();
        let out = sq.substitute(&[(X, Binding::Series(b.clone()))], None).unwrap();
        let want = MultiSeries::from_terms(
            &[y],
            &[2],
            vec![(vec![0], rat(1, 1)), (vec![1], rat(2, 1)), (vec![2], rat(1, 1))],
        )
        .unwrap();
        match out {
            Substituted::Series(s) => assert_eq!(s, want),
            _ => panic!("expected a series"),
        }
        let trunc = MultiSeries::monomial(&[X], &[2], &[(X, 2)], rat(1, 1)).unwrap();
        assert!(trunc.substitute(&[(X, Binding::Series(b))], None).is_err());
    }

    #[test]
    fn exp_at_zero_is_one() {
        let e = uni(&[rat(0, 1), rat(1, 1)], 6).exp().unwrap();
        match e.substitute(&[(X, Binding::Exact(rat(0, 1)))], None).unwrap() {
            Substituted::Series(s) => assert_eq!(s.get(&[]), rat(1, 1)),
            _ => panic!(),
        }
    }

    #[test]
    fn f64_ring_flushes_tiny_values() {
        assert_eq!(Coeff::mul(&1e-200f64, &1e-200), 0.0);
        assert_eq!(ratio_to_f64(&BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399))), 10.0);
    }
}
