//! Two-type Bienaymé–Galton–Watson trees: unconditioned and conditioned
//! sampling, size-biased spine trees, fringe subtrees and degree profiles.
//!
//! A tree is stored as the depth-first (preorder) sequence of its black
//! nodes' offspring counts `(ξ_v, ζ_v)`. White nodes are implicit: the white
//! children of black node `v` are `(v, 0), …, (v, ζ_v − 1)`, and the global
//! depth-first white order lists them by parent preorder.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::Serialize;

use crate::analytic::{OffspringLaw, OffspringSampler};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Finite two-type plane tree with a black root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoTypeTree {
    xi: Vec<u32>,
    zeta: Vec<u32>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
    white_start: Vec<u64>,
}

/// A white vertex, addressed by its black parent and its rank among the
/// parent's white children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WhiteRef {
    pub parent: u32,
    pub index: u32,
}

impl TwoTypeTree {
    /// Builds a tree from its preorder offspring sequence.
    pub fn from_preorder(xi: Vec<u32>, zeta: Vec<u32>) -> Result<Self> {
        if xi.is_empty() || xi.len() != zeta.len() {
            return Err(Error::Domain("preorder sequences must be non-empty and of equal length".into()));
        }
        let n = xi.len();
        let mut parent = vec![NONE; n];
        let mut depth = vec![0u32; n];
        let mut child_start = vec![0u32; n + 1];
        for v in 0..n {
            child_start[v + 1] = child_start[v] + xi[v];
        }
        if child_start[n] as usize != n - 1 {
            return Err(Error::Domain("offspring counts do not describe a tree".into()));
        }
        let mut children = vec![0u32; n - 1];
        // Stack of (node, next child slot).
        let mut stack: Vec<(u32, u32)> = vec![(0, 0)];
        for v in 1..n as u32 {
            while let Some(&(p, used)) = stack.last() {
                if used < xi[p as usize] {
                    break;
                }
                stack.pop();
            }
            let Some(top) = stack.last_mut() else {
                return Err(Error::Domain("offspring sequence ends early".into()));
            };
            let p = top.0;
            children[(child_start[p as usize] + top.1) as usize] = v;
            top.1 += 1;
            parent[v as usize] = p;
            depth[v as usize] = depth[p as usize] + 1;
            stack.push((v, 0));
        }
        if stack.iter().any(|&(p, used)| used < xi[p as usize]) {
            return Err(Error::Domain("offspring sequence ends early".into()));
        }
        let mut white_start = vec![0u64; n + 1];
        for v in 0..n {
            white_start[v + 1] = white_start[v] + zeta[v] as u64;
        }
        Ok(TwoTypeTree { xi, zeta, parent, depth, child_start, children, white_start })
    }

    /// The single black root with no children.
    pub fn root_only() -> Self {
        Self::from_preorder(vec![0], vec![0]).expect("single node")
    }

    /// `#₁T`
    pub fn black_count(&self) -> usize {
        self.xi.len()
    }

    /// `#₂T`
    pub fn white_count(&self) -> u64 {
        self.white_start[self.xi.len()]
    }

    pub fn xi(&self, v: u32) -> u32 {
        self.xi[v as usize]
    }

    pub fn zeta(&self, v: u32) -> u32 {
        self.zeta[v as usize]
    }

    pub fn offspring(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.xi.iter().copied().zip(self.zeta.iter().copied())
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != NONE).then_some(p)
    }

    /// Depth of a black node; the root has depth 0.
    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    /// Black children in order.
    pub fn black_children(&self, v: u32) -> &[u32] {
        let (a, b) = (self.child_start[v as usize], self.child_start[v as usize + 1]);
        &self.children[a as usize..b as usize]
    }

    /// Height of a white vertex: its parent's depth plus one.
    pub fn white_height(&self, w: WhiteRef) -> u32 {
        self.depth[w.parent as usize] + 1
    }

    /// The `i`-th white vertex (0-based) in depth-first order.
    pub fn white(&self, i: u64) -> WhiteRef {
        let v = self.white_start.partition_point(|&s| s <= i) - 1;
        WhiteRef { parent: v as u32, index: (i - self.white_start[v]) as u32 }
    }

    /// Depth-first rank of a white vertex.
    pub fn white_rank(&self, w: WhiteRef) -> u64 {
        self.white_start[w.parent as usize] + w.index as u64
    }

    /// Largest vertex height (whites count one below their parent).
    pub fn height(&self) -> u32 {
        (0..self.xi.len())
            .map(|v| self.depth[v] + u32::from(self.zeta[v] > 0))
            .max()
            .unwrap_or(0)
    }

    /// Vertices (black and white) in each black node's subtree.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let mut size: Vec<u64> = self.zeta.iter().map(|&z| 1 + z as u64).collect();
        for v in (1..self.xi.len()).rev() {
            let p = self.parent[v] as usize;
            size[p] += size[v];
        }
        size
    }

    /// Preorder offspring sequence of the subtree rooted at `v`.
    fn subtree_sequence(&self, v: u32, blacks: usize) -> Vec<(u32, u32)> {
        (v as usize..v as usize + blacks).map(|u| (self.xi[u], self.zeta[u])).collect()
    }

    /// Black nodes in `v`'s subtree (a contiguous preorder range).
    fn subtree_blacks(&self, v: u32) -> usize {
        let mut end = v as usize + 1;
        let mut pending = self.xi[v as usize] as i64;
        while pending > 0 {
            pending += self.xi[end] as i64 - 1;
            end += 1;
        }
        end - v as usize
    }

    /// Ancestor of black node `v` that is `up` levels higher.
    fn ancestor(&self, mut v: u32, up: u32) -> u32 {
        for _ in 0..up {
            v = self.parent[v as usize];
        }
        v
    }
}

/// Tree marked at a white vertex, with the spine of black ancestors when it
/// was built as a size-biased tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedTree {
    pub tree: TwoTypeTree,
    pub mark: WhiteRef,
    pub spine: Vec<u32>,
}

/// Preorder generation with caps on black nodes and white vertices. Returns
/// `None` when a cap is hit.
fn grow<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    rng: &mut R,
    xi: &mut Vec<u32>,
    zeta: &mut Vec<u32>,
    node_cap: usize,
    white_cap: u64,
) -> Option<u64> {
    let start = xi.len();
    let mut pending: u64 = 1;
    let mut whites = 0u64;
    while pending > 0 {
        if xi.len() - start >= node_cap {
            return None;
        }
        let (a, b) = sampler.sample(rng);
        whites += b as u64;
        if whites > white_cap {
            return None;
        }
        xi.push(a);
        zeta.push(b);
        pending += a as u64;
        pending -= 1;
    }
    Some(whites)
}

/// Unconditioned tree; `Resource` error when more than `node_cap` black
/// nodes would be generated.
pub fn sample_bgw<R: Rng + ?Sized>(sampler: &OffspringSampler, rng: &mut R, node_cap: usize) -> Result<TwoTypeTree> {
    let (mut xi, mut zeta) = (Vec::new(), Vec::new());
    grow(sampler, rng, &mut xi, &mut zeta, node_cap, u64::MAX)
        .ok_or_else(|| Error::Resource(format!("tree exceeds {node_cap} black nodes")))?;
    TwoTypeTree::from_preorder(xi, zeta)
}

/// How [`ConditionedSampler`] draws `T_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionedMethod {
    /// Every table entry has `ξ = c·ζ`, so `#₁T = 1 + c·n` is fixed: an iid
    /// offspring sequence conditioned on its sum, cyclically rotated to the
    /// unique valid Łukasiewicz path.
    CycleLemma { ratio: u32 },
    /// Whole-tree rejection with early abort once the white count exceeds `n`.
    Rejection,
}

/// Attempt statistics of a conditioned draw.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AttemptStats {
    pub attempts: u64,
    pub draws: u64,
}

/// Sampler of `T_n`, the tree conditioned on `#₂T = n`.
#[derive(Clone, Debug)]
pub struct ConditionedSampler {
    joint: OffspringSampler,
    method: ConditionedMethod,
    zeta_alias: Option<(WeightedAliasIndex<f64>, Vec<u32>)>,
}

impl ConditionedSampler {
    pub fn new(law: &OffspringLaw) -> Result<Self> {
        Self::with_method(law, None)
    }

    /// Forces plain rejection when `rejection_only` is set.
    pub fn with_method(law: &OffspringLaw, rejection_only: Option<bool>) -> Result<Self> {
        let joint = law.sampler()?;
        let live: Vec<_> = law.entries.iter().filter(|e| e.p > 0.0).collect();
        let ratio = live.iter().find(|e| e.zeta > 0).map(|e| e.xi / e.zeta);
        let fixed = ratio.filter(|&c| c >= 1 && live.iter().all(|e| e.xi == c * e.zeta));
        let (method, zeta_alias) = match fixed {
            Some(c) if !rejection_only.unwrap_or(false) => {
                let values: Vec<u32> = live.iter().map(|e| e.zeta).collect();
                let alias = WeightedAliasIndex::new(live.iter().map(|e| e.p).collect())
                    .map_err(|e| Error::Domain(format!("offspring table: {e}")))?;
                (ConditionedMethod::CycleLemma { ratio: c }, Some((alias, values)))
            }
            _ => (ConditionedMethod::Rejection, None),
        };
        Ok(ConditionedSampler { joint, method, zeta_alias })
    }

    pub fn method(&self) -> ConditionedMethod {
        self.method
    }

    pub fn joint(&self) -> &OffspringSampler {
        &self.joint
    }

    /// Draws `T_n`; `Exhausted` after `max_attempts` failed attempts.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, max_attempts: u64) -> Result<(TwoTypeTree, AttemptStats)> {
        if n == 0 {
            return Err(Error::Domain("conditioning requires n ≥ 1".into()));
        }
        match (self.method, &self.zeta_alias) {
            (ConditionedMethod::CycleLemma { ratio }, Some((alias, values))) => {
                cycle_lemma(alias, values, ratio, n, rng, max_attempts)
            }
            _ => self.rejection(n, rng, max_attempts),
        }
    }

    fn rejection<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, max_attempts: u64) -> Result<(TwoTypeTree, AttemptStats)> {
        let mut stats = AttemptStats::default();
        let (mut xi, mut zeta) = (Vec::new(), Vec::new());
        // A tree with n whites has at most n·(max ξ per white) + 1 black nodes
        // plus childless chains; the cap only guards against runaway memory.
        let node_cap = (64 * n as usize).max(1 << 16);
        while stats.attempts < max_attempts {
            stats.attempts += 1;
            xi.clear();
            zeta.clear();
            let got = grow(&self.joint, rng, &mut xi, &mut zeta, node_cap, n);
            stats.draws += xi.len() as u64;
            if got == Some(n) {
                return Ok((TwoTypeTree::from_preorder(xi, zeta)?, stats));
            }
        }
        Err(Error::Exhausted {
            attempts: stats.attempts,
            detail: format!("rejection for n = {n}, {} offspring draws", stats.draws),
        })
    }
}

fn cycle_lemma<R: Rng + ?Sized>(
    alias: &WeightedAliasIndex<f64>,
    values: &[u32],
    ratio: u32,
    n: u64,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(TwoTypeTree, AttemptStats)> {
    let blacks = 1 + ratio as u64 * n;
    let len = usize::try_from(blacks).map_err(|_| Error::Resource("tree too large".into()))?;
    let mut stats = AttemptStats::default();
    let mut z = Vec::with_capacity(len);
    while stats.attempts < max_attempts {
        stats.attempts += 1;
        z.clear();
        let mut sum = 0u64;
        while z.len() < len {
            let b = values[alias.sample(rng)];
            sum += b as u64;
            if sum > n {
                break;
            }
            z.push(b);
        }
        stats.draws += z.len() as u64 + u64::from(sum > n);
        if z.len() < len || sum != n {
            continue;
        }
        // Rotate to start right after the first minimum of Σ(ξ − 1).
        let (mut s, mut min, mut at) = (0i64, i64::MAX, 0usize);
        for (i, &b) in z.iter().enumerate() {
            s += (ratio * b) as i64 - 1;
            if s < min {
                min = s;
                at = i;
            }
        }
        z.rotate_left((at + 1) % len);
        let xi = z.iter().map(|&b| ratio * b).collect();
        return Ok((TwoTypeTree::from_preorder(xi, z)?, stats));
    }
    Err(Error::Exhausted { attempts: stats.attempts, detail: format!("cycle lemma for n = {n}, {} draws", stats.draws) })
}

/// Samplers for the size-biased laws `(ξ•, ζ•)` and `(ξ°, ζ°)`.
#[derive(Clone, Debug)]
pub struct SpineSampler {
    plain: OffspringSampler,
    black: OffspringSampler,
    white: OffspringSampler,
}

impl SpineSampler {
    pub fn new(law: &OffspringLaw) -> Result<Self> {
        Ok(SpineSampler {
            plain: law.sampler()?,
            black: OffspringSampler::new(&law.black_biased())?,
            white: OffspringSampler::new(&law.white_biased())?,
        })
    }

    /// `T^(ℓ)`: spine `u_0 … u_ℓ`, biased offspring along it, a uniform white
    /// child of the tip marked, unconditioned trees elsewhere. `Resource` when
    /// an off-spine subtree exceeds `node_cap` black nodes.
    pub fn sample<R: Rng + ?Sized>(&self, ell: u32, rng: &mut R, node_cap: usize) -> Result<MarkedTree> {
        // Each spine node is emitted, then its black children in order, where
        // the chosen child continues the spine after its left siblings' subtrees.
        let (mut xi, mut zeta) = (Vec::new(), Vec::new());
        let mut spine = Vec::with_capacity(ell as usize + 1);
        let mut right: Vec<u32> = Vec::new();
        let mut mark = WhiteRef { parent: 0, index: 0 };
        for level in 0..=ell {
            let u = xi.len() as u32;
            spine.push(u);
            let tip = level == ell;
            let (a, b) = if tip { self.white.sample(rng) } else { self.black.sample(rng) };
            xi.push(a);
            zeta.push(b);
            if tip {
                mark = WhiteRef { parent: u, index: rng.gen_range(0..b) };
                for _ in 0..a {
                    self.hang(rng, &mut xi, &mut zeta, node_cap)?;
                }
            } else {
                let j = rng.gen_range(0..a);
                for _ in 0..j {
                    self.hang(rng, &mut xi, &mut zeta, node_cap)?;
                }
                right.push(a - 1 - j);
            }
        }
        // Right siblings of spine nodes, innermost first.
        for &r in right.iter().rev() {
            for _ in 0..r {
                self.hang(rng, &mut xi, &mut zeta, node_cap)?;
            }
        }
        Ok(MarkedTree { tree: TwoTypeTree::from_preorder(xi, zeta)?, mark, spine })
    }

    fn hang<R: Rng + ?Sized>(&self, rng: &mut R, xi: &mut Vec<u32>, zeta: &mut Vec<u32>, node_cap: usize) -> Result<()> {
        grow(&self.plain, rng, xi, zeta, node_cap, u64::MAX)
            .map(|_| ())
            .ok_or_else(|| Error::Resource(format!("off-spine subtree exceeds {node_cap} black nodes")))
    }
}

/// A finite marked fringe tree, or the placeholder for an undefined fringe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Fringe {
    /// `f^{[h]}` is undefined: the mark lies at height below `h`.
    Undefined,
    /// `f^{[0]}`: the single marked white vertex.
    Leaf,
    /// Preorder offspring sequence of the subtree with the mark inside it.
    Tree { offspring: Vec<(u32, u32)>, mark: WhiteRef },
}

impl Fringe {
    /// Number of vertices.
    pub fn size(&self) -> u64 {
        match self {
            Fringe::Undefined => 0,
            Fringe::Leaf => 1,
            Fringe::Tree { offspring, .. } => offspring.iter().map(|&(_, b)| 1 + b as u64).sum(),
        }
    }

    /// Height of the mark above the fringe root.
    pub fn height(&self) -> Option<u32> {
        match self {
            Fringe::Undefined => None,
            Fringe::Leaf => Some(0),
            Fringe::Tree { offspring, mark } => {
                let t = TwoTypeTree::from_preorder(offspring.iter().map(|p| p.0).collect(), offspring.iter().map(|p| p.1).collect()).ok()?;
                Some(t.white_height(*mark))
            }
        }
    }

    /// Compact text form: `(ξ,ζ)` pairs in preorder and the mark.
    pub fn key(&self) -> String {
        match self {
            Fringe::Undefined => "undefined".into(),
            Fringe::Leaf => "leaf".into(),
            Fringe::Tree { offspring, mark } => {
                let seq: Vec<String> = offspring.iter().map(|(a, b)| format!("{a}.{b}")).collect();
                format!("{}@{}.{}", seq.join("-"), mark.parent, mark.index)
            }
        }
    }
}

/// `f^{[h]}(T, v)` at the marked vertex.
pub fn fringe(marked: &MarkedTree, h: u32) -> Fringe {
    fringe_at(&marked.tree, marked.mark, h)
}

/// `f^{[h]}(T, w)` for a white vertex `w`.
pub fn fringe_at(tree: &TwoTypeTree, w: WhiteRef, h: u32) -> Fringe {
    if h == 0 {
        return Fringe::Leaf;
    }
    if tree.white_height(w) < h {
        return Fringe::Undefined;
    }
    let a = tree.ancestor(w.parent, h - 1);
    let blacks = tree.subtree_blacks(a);
    Fringe::Tree { offspring: tree.subtree_sequence(a, blacks), mark: WhiteRef { parent: w.parent - a, index: w.index } }
}

/// Counts of `f^{[h]}(T, w)` over all white vertices `w`, keeping fringes
/// with at most `max_size` vertices; larger ones are tallied in the second
/// component and undefined ones under [`Fringe::Undefined`].
pub fn fringe_counts(tree: &TwoTypeTree, h: u32, max_size: u64) -> (BTreeMap<Fringe, u64>, u64) {
    let mut counts = BTreeMap::new();
    if h == 0 {
        counts.insert(Fringe::Leaf, tree.white_count());
        return (counts, 0);
    }
    let sizes = tree.subtree_sizes();
    let mut large = 0u64;
    let mut undefined = 0u64;
    for v in 0..tree.black_count() as u32 {
        let b = tree.zeta(v);
        if b == 0 {
            continue;
        }
        if tree.depth(v) + 1 < h {
            undefined += b as u64;
            continue;
        }
        let a = tree.ancestor(v, h - 1);
        if sizes[a as usize] > max_size {
            large += b as u64;
            continue;
        }
        let blacks = tree.subtree_blacks(a);
        let seq = tree.subtree_sequence(a, blacks);
        for index in 0..b {
            let key = Fringe::Tree { offspring: seq.clone(), mark: WhiteRef { parent: v - a, index } };
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    if undefined > 0 {
        counts.insert(Fringe::Undefined, undefined);
    }
    (counts, large)
}

/// `P(f^{[h_τ]}(T°) = τ)`: product of table probabilities over black nodes
/// divided by `E[ζ]`; the single marked white vertex has probability 1.
pub fn fringe_probability(law: &OffspringLaw, tau: &Fringe) -> Result<f64> {
    match tau {
        Fringe::Undefined => Err(Error::Domain("the undefined fringe has no probability".into())),
        Fringe::Leaf => Ok(1.0),
        Fringe::Tree { offspring, mark } => {
            let xi = offspring.iter().map(|p| p.0).collect();
            let zeta = offspring.iter().map(|p| p.1).collect();
            let t = TwoTypeTree::from_preorder(xi, zeta)?;
            if mark.parent as usize >= t.black_count() || mark.index >= t.zeta(mark.parent) {
                return Err(Error::Domain("the mark must be a white vertex of the tree".into()));
            }
            let p: f64 = offspring.iter().map(|&(a, b)| law.prob(a, b)).product();
            Ok(p / law.mean_zeta())
        }
    }
}

/// Degree statistics of a tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    /// `#₁T`
    pub black: u64,
    /// `#₂T`
    pub white: u64,
    /// `B_d`: black nodes with `d` black children.
    pub by_black_degree: Vec<u64>,
    /// Largest number of white children of a black node.
    pub max_white_degree: u32,
}

impl DegreeProfile {
    pub fn b(&self, d: usize) -> u64 {
        self.by_black_degree.get(d).copied().unwrap_or(0)
    }
}

pub fn degree_profile(tree: &TwoTypeTree) -> DegreeProfile {
    let mut by = Vec::new();
    let mut max_white = 0;
    for (a, b) in tree.offspring() {
        if by.len() <= a as usize {
            by.resize(a as usize + 1, 0);
        }
        by[a as usize] += 1;
        max_white = max_white.max(b);
    }
    DegreeProfile { black: tree.black_count() as u64, white: tree.white_count(), by_black_degree: by, max_white_degree: max_white }
}

/// `(L_n, L_n')` for a uniform variate `u ∈ (0, 1]`: `⌈u·#₁⌉` and the
/// 1-based preorder position of the black parent of the `⌈u·n⌉`-th white vertex.
pub fn coupled_positions(tree: &TwoTypeTree, u: f64) -> (u64, u64) {
    let ceil = |m: u64| ((u * m as f64).ceil() as u64).clamp(1, m.max(1));
    let l = ceil(tree.black_count() as u64);
    let n = tree.white_count();
    let lp = if n == 0 { 0 } else { tree.white(ceil(n) - 1).parent as u64 + 1 };
    (l, lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preorder_round_trip() {
        // Root with children 1 (leaf) and 2 (one child 3).
        let t = TwoTypeTree::from_preorder(vec![2, 0, 1, 0], vec![1, 0, 2, 1]).unwrap();
        assert_eq!(t.black_children(0), &[1, 2]);
        assert_eq!(t.black_children(2), &[3]);
        assert_eq!(t.depth(3), 2);
        assert_eq!(t.white_count(), 4);
        assert_eq!(t.white(1), WhiteRef { parent: 2, index: 0 });
        assert_eq!(t.white_rank(WhiteRef { parent: 3, index: 0 }), 3);
        assert_eq!(t.subtree_sizes(), vec![8, 1, 5, 2]);
        assert_eq!(t.height(), 3);
        assert!(TwoTypeTree::from_preorder(vec![1, 1], vec![0, 0]).is_err());
        assert!(TwoTypeTree::from_preorder(vec![0, 0], vec![0, 0]).is_err());
    }

    #[test]
    fn fringe_definitions() {
        let t = TwoTypeTree::from_preorder(vec![2, 0, 1, 0], vec![1, 0, 2, 1]).unwrap();
        let w = WhiteRef { parent: 3, index: 0 };
        assert_eq!(fringe_at(&t, w, 0), Fringe::Leaf);
        assert_eq!(fringe_at(&t, w, 1), Fringe::Tree { offspring: vec![(0, 1)], mark: WhiteRef { parent: 0, index: 0 } });
        assert_eq!(fringe_at(&t, w, 4), Fringe::Undefined);
        let full = fringe_at(&t, w, 3);
        assert_eq!(full, Fringe::Tree { offspring: t.offspring().collect(), mark: w });
        assert_eq!(full.height(), Some(3));
        assert_eq!(full.size(), 8);
    }
}
