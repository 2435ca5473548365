//! Graph representation and the chordal-graph algorithms: lexicographic BFS,
//! perfect-elimination verification, clique statistics, vertex connectivity
//! and distances.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

/// Undirected simple graph on dense ids `0..n`, with an optional ordered
/// root clique and an optional labelling (a permutation of `1..=n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalGraph {
    adj: Vec<Vec<u32>>,
    pub root_clique: Option<Vec<u32>>,
    pub labels: Option<Vec<u32>>,
}

impl ChordalGraph {
    pub fn new(n: usize) -> Self {
        ChordalGraph { adj: vec![Vec::new(); n], root_clique: None, labels: None }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = ChordalGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u as u32, v as u32);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = ChordalGraph::new(n);
        for u in 1..n {
            g.add_edge(u as u32 - 1, u as u32);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = ChordalGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn add_vertex(&mut self) -> u32 {
        self.adj.push(Vec::new());
        self.adj.len() as u32 - 1
    }

    /// Adds `u–v` unless already present; self-loops are ignored.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        if u == v {
            return;
        }
        let a = &mut self.adj[u as usize];
        if let Err(p) = a.binary_search(&v) {
            a.insert(p, v);
            let b = &mut self.adj[v as usize];
            let q = b.binary_search(&u).unwrap_err();
            b.insert(q, u);
        }
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nb) in self.adj.iter().enumerate() {
            for &v in nb {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// Edges in label space (`labels[u]`, `labels[v]`), normalized and sorted;
    /// falls back to ids when unlabelled.
    pub fn labelled_edges(&self) -> Vec<(u32, u32)> {
        let Some(l) = &self.labels else { return self.edges() };
        let mut out: Vec<(u32, u32)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (l[u as usize], l[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_clique(&self, vs: &[u32]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Lexicographic breadth-first search by partition refinement. Returns the
    /// visit order; its reverse is a perfect elimination ordering iff the
    /// graph is chordal.
    pub fn lex_bfs(&self) -> Vec<u32> {
        let n = self.n();
        if n == 0 {
            return Vec::new();
        }
        // Classes form a doubly linked list ordered by label (highest first);
        // each class holds its vertices in a Vec with position bookkeeping.
        let mut members: Vec<Vec<u32>> = vec![(0..n as u32).rev().collect()];
        let mut prev: Vec<usize> = vec![usize::MAX];
        let mut next: Vec<usize> = vec![usize::MAX];
        let mut head = 0usize;
        let mut class_of = vec![0usize; n];
        let mut pos: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
        let mut visited = vec![false; n];
        let mut split_into: Vec<usize> = vec![usize::MAX];
        let mut split_stamp: Vec<usize> = vec![usize::MAX];
        let mut order = Vec::with_capacity(n);
        for step in 0..n {
            while members[head].is_empty() {
                head = next[head];
                prev[head] = usize::MAX;
            }
            let v = members[head].pop().unwrap();
            visited[v as usize] = true;
            order.push(v);
            for &w in &self.adj[v as usize] {
                let w = w as usize;
                if visited[w] {
                    continue;
                }
                let c = class_of[w];
                if split_stamp[c] != step {
                    split_stamp[c] = step;
                    let nc = members.len();
                    members.push(Vec::new());
                    split_into.push(usize::MAX);
                    split_stamp.push(usize::MAX);
                    prev.push(prev[c]);
                    next.push(c);
                    if prev[c] != usize::MAX {
                        next[prev[c]] = nc;
                    } else {
                        head = nc;
                    }
                    prev[c] = nc;
                    split_into[c] = nc;
                }
                let nc = split_into[c];
                let p = pos[w];
                let last = *members[c].last().unwrap();
                members[c].swap_remove(p);
                if last as usize != w {
                    pos[last as usize] = p;
                }
                pos[w] = members[nc].len();
                members[nc].push(w as u32);
                class_of[w] = nc;
            }
        }
        order
    }

    /// Elimination structure derived from a candidate ordering.
    pub fn elimination(&self, order: &[u32]) -> Elimination {
        let n = self.n();
        let mut pos = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i;
        }
        let follow: Vec<Vec<u32>> = (0..n)
            .map(|v| {
                let mut f: Vec<u32> = self.adj[v].iter().copied().filter(|&w| pos[w as usize] > pos[v]).collect();
                f.sort_unstable_by_key(|&w| pos[w as usize]);
                f
            })
            .collect();
        Elimination { order: order.to_vec(), pos, follow }
    }

    /// A verified perfect elimination ordering, or `None` when not chordal.
    pub fn peo(&self) -> Option<Elimination> {
        let mut order = self.lex_bfs();
        order.reverse();
        let e = self.elimination(&order);
        if e.verify(self) {
            Some(e)
        } else {
            None
        }
    }

    pub fn is_chordal(&self) -> bool {
        self.peo().is_some()
    }

    pub fn clique_number(&self) -> Result<usize> {
        let e = self.peo().ok_or_else(|| Error::Domain("graph is not chordal".into()))?;
        Ok(e.clique_number())
    }

    /// Number of `j`-cliques, via the elimination ordering.
    pub fn clique_count(&self, j: usize) -> Result<u64> {
        let e = self.peo().ok_or_else(|| Error::Domain("graph is not chordal".into()))?;
        Ok(e.clique_count(j))
    }

    pub fn components(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s as u32);
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }

    /// Vertex connectivity of a chordal graph (`n − 1` for complete graphs):
    /// the smallest minimal separator, read off the clique tree induced by the
    /// perfect elimination ordering.
    pub fn connectivity(&self) -> Result<usize> {
        let e = self.peo().ok_or_else(|| Error::Domain("graph is not chordal".into()))?;
        Ok(e.connectivity(self))
    }

    /// Vertex connectivity by exhaustive search over vertex subsets; any graph
    /// with at most 16 vertices.
    pub fn connectivity_exhaustive(&self) -> Result<usize> {
        let n = self.n();
        if n > 16 {
            return Err(Error::Resource("exhaustive connectivity limited to 16 vertices".into()));
        }
        let masks: Vec<u32> = self.adj.iter().map(|nb| nb.iter().fold(0u32, |m, &w| m | 1 << w)).collect();
        Ok(mask_connectivity(&masks, n))
    }

    /// Paper convention: `K_k` counts as k-connected; otherwise at least
    /// `k + 1` vertices and no separator with fewer than `k` vertices.
    pub fn is_k_connected(&self, k: usize) -> Result<bool> {
        let n = self.n();
        if n < k {
            return Ok(false);
        }
        let kappa = self.connectivity()?;
        Ok(kappa >= k || (n == k && self.edge_count() == n * (n - 1) / 2))
    }

    /// Breadth-first distances from `s` (`u32::MAX` when unreachable).
    pub fn bfs(&self, s: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut q = VecDeque::new();
        dist[s as usize] = 0;
        q.push_back(s);
        while let Some(v) = q.pop_front() {
            let d = dist[v as usize] + 1;
            for &w in &self.adj[v as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Distance rows for each source.
    pub fn distances(&self, sources: &[u32]) -> Result<Vec<Vec<u32>>> {
        if !self.is_connected() {
            return Err(Error::Domain("distances requested on a disconnected graph".into()));
        }
        Ok(sources.iter().map(|&s| self.bfs(s)).collect())
    }

    /// Exact diameter by BFS from every vertex.
    pub fn diameter_all_pairs(&self) -> Result<u32> {
        if !self.is_connected() {
            return Err(Error::Domain("diameter of a disconnected graph".into()));
        }
        Ok((0..self.n() as u32)
            .map(|s| self.bfs(s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0))
    }

    /// Exact diameter by the iterative fringe upper bound method: a double
    /// sweep gives a central start vertex and a lower bound, then BFS levels
    /// are scanned from the outside in until the bound is certified.
    pub fn diameter(&self) -> Result<u32> {
        if !self.is_connected() {
            return Err(Error::Domain("diameter of a disconnected graph".into()));
        }
        let n = self.n();
        if n <= 1 {
            return Ok(0);
        }
        let d0 = self.bfs(0);
        let a = argmax(&d0);
        let da = self.bfs(a);
        let b = argmax(&da);
        let db = self.bfs(b);
        let mut lower = da[b as usize];
        // Midpoint of the a–b path as the centre.
        let half = lower / 2;
        let centre = (0..n as u32)
            .find(|&v| da[v as usize] == half && db[v as usize] == lower - half)
            .unwrap_or(a);
        let dc = self.bfs(centre);
        let ecc = *dc.iter().max().unwrap();
        lower = lower.max(ecc);
        let mut levels: Vec<Vec<u32>> = vec![Vec::new(); ecc as usize + 1];
        for v in 0..n as u32 {
            levels[dc[v as usize] as usize].push(v);
        }
        let mut i = ecc;
        while i > 0 && 2 * i > lower {
            let mut best = lower;
            for &v in &levels[i as usize] {
                let e = *self.bfs(v).iter().max().unwrap();
                best = best.max(e);
            }
            lower = best;
            if lower > 2 * (i - 1) {
                break;
            }
            i -= 1;
        }
        Ok(lower)
    }

    /// Checks the class constraints: chordal, clique number at most `t + 1`,
    /// k-connected in the convention of [`is_k_connected`](Self::is_k_connected).
    pub fn verify_member(&self, t: usize, k: usize) -> MembershipReport {
        match self.peo() {
            None => MembershipReport { chordal: false, clique_number: None, connectivity: None, ok: false },
            Some(e) => {
                let omega = e.clique_number();
                let kappa = e.connectivity(self);
                let n = self.n();
                let complete_k = n == k && self.edge_count() == n * n.saturating_sub(1) / 2;
                let ok = omega <= t + 1 && n >= k && (kappa >= k || complete_k) && self.root_ok();
                MembershipReport { chordal: true, clique_number: Some(omega), connectivity: Some(kappa), ok }
            }
        }
    }

    fn root_ok(&self) -> bool {
        match &self.root_clique {
            None => true,
            Some(r) => r.iter().all(|&v| (v as usize) < self.n()) && self.is_clique(r),
        }
    }

    /// Renumbers vertices by `perm` (old id → new id).
    pub fn permuted(&self, perm: &[u32]) -> ChordalGraph {
        let mut g = ChordalGraph::new(self.n());
        for (u, v) in self.edges() {
            g.add_edge(perm[u as usize], perm[v as usize]);
        }
        g.root_clique = self.root_clique.as_ref().map(|r| r.iter().map(|&v| perm[v as usize]).collect());
        if let Some(l) = &self.labels {
            let mut nl = vec![0; l.len()];
            for (v, &x) in l.iter().enumerate() {
                nl[perm[v] as usize] = x;
            }
            g.labels = Some(nl);
        }
        g
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        let name = |v: u32| self.labels.as_ref().map_or(v, |l| l[v as usize]);
        for v in 0..self.n() as u32 {
            let root = self.root_clique.as_ref().is_some_and(|r| r.contains(&v));
            if root {
                s.push_str(&format!("  {} [shape=box];\n", name(v)));
            } else {
                s.push_str(&format!("  {};\n", name(v)));
            }
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  {} -- {};\n", name(u), name(v)));
        }
        s.push_str("}\n");
        s
    }
}

fn argmax(d: &[u32]) -> u32 {
    let mut best = 0;
    for (i, &x) in d.iter().enumerate() {
        if x != u32::MAX && x > d[best] {
            best = i;
        }
    }
    best as u32
}

/// Outcome of [`ChordalGraph::verify_member`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub chordal: bool,
    pub clique_number: Option<usize>,
    pub connectivity: Option<usize>,
    pub ok: bool,
}

/// An elimination ordering together with each vertex's later neighbours
/// (sorted by elimination position).
#[derive(Clone, Debug)]
pub struct Elimination {
    pub order: Vec<u32>,
    pub pos: Vec<usize>,
    pub follow: Vec<Vec<u32>>,
}

impl Elimination {
    /// Verification: for every vertex, its later neighbours other than the
    /// earliest one must be adjacent to that earliest one.
    pub fn verify(&self, g: &ChordalGraph) -> bool {
        let n = g.n();
        let mut mark = vec![usize::MAX; n];
        // Group the obligations by parent, then check each parent once.
        let mut by_parent: Vec<Vec<u32>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(&p) = self.follow[v].first() {
                by_parent[p as usize].push(v as u32);
            }
        }
        for p in 0..n {
            if by_parent[p].is_empty() {
                continue;
            }
            for &w in g.neighbors(p as u32) {
                mark[w as usize] = p;
            }
            for &v in &by_parent[p] {
                for &w in &self.follow[v as usize][1..] {
                    if mark[w as usize] != p {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn clique_number(&self) -> usize {
        self.follow.iter().map(|f| f.len() + 1).max().unwrap_or(0)
    }

    pub fn clique_count(&self, j: usize) -> u64 {
        if j == 0 {
            return 1;
        }
        self.follow.iter().map(|f| binom(f.len() as u64, j as u64 - 1)).sum()
    }

    /// For each vertex, an earlier-eliminated child whose clique strictly
    /// extends its own, if any.
    fn dominating_child(&self) -> Vec<Option<u32>> {
        let n = self.follow.len();
        let mut dom = vec![None; n];
        for u in 0..n {
            if let Some(&p) = self.follow[u].first() {
                if self.follow[u].len() == self.follow[p as usize].len() + 1 {
                    dom[p as usize] = Some(u as u32);
                }
            }
        }
        dom
    }

    /// Representatives `v` whose clique `{v} ∪ follow(v)` is maximal.
    pub fn maximal_cliques(&self) -> Vec<u32> {
        let dom = self.dominating_child();
        self.order.iter().copied().filter(|&v| dom[v as usize].is_none()).collect()
    }

    /// Sizes of the minimal separators (the clique tree edges), one per
    /// vertex whose elimination parent lies in a different maximal clique.
    pub fn separator_sizes(&self) -> Vec<usize> {
        let dom = self.dominating_child();
        let mut clique = vec![0u32; self.follow.len()];
        for &v in &self.order {
            clique[v as usize] = match dom[v as usize] {
                Some(w) => clique[w as usize],
                None => v,
            };
        }
        self.order
            .iter()
            .filter_map(|&v| {
                let p = *self.follow[v as usize].first()?;
                (clique[v as usize] != clique[p as usize]).then_some(self.follow[v as usize].len())
            })
            .collect()
    }

    /// Vertex connectivity (assumes the ordering is a verified PEO of `g`).
    pub fn connectivity(&self, g: &ChordalGraph) -> usize {
        let n = g.n();
        if n == 0 {
            return 0;
        }
        if g.edge_count() == n * (n - 1) / 2 {
            return n - 1;
        }
        if !g.is_connected() {
            return 0;
        }
        self.separator_sizes().into_iter().min()
            .unwrap_or(n - 1)
    }
}

pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Vertex connectivity of a small graph given as adjacency bitmasks.
pub fn mask_connectivity(adj: &[u32], n: usize) -> usize {
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    if adj.iter().enumerate().all(|(v, &m)| m == full & !(1 << v)) {
        return n.saturating_sub(1);
    }
    for size in 0..n {
        let mut found = false;
        for_each_subset(n, size, &mut |s| {
            if !found && !mask_connected(adj, full & !s) {
                found = true;
            }
        });
        if found {
            return size;
        }
    }
    n.saturating_sub(1)
}

fn for_each_subset(n: usize, size: usize, f: &mut dyn FnMut(u32)) {
    fn rec(start: usize, n: usize, left: usize, acc: u32, f: &mut dyn FnMut(u32)) {
        if left == 0 {
            f(acc);
            return;
        }
        for v in start..n {
            if n - v < left {
                break;
            }
            rec(v + 1, n, left - 1, acc | 1 << v, f);
        }
    }
    rec(0, n, size, 0, f);
}

/// Whether the subgraph induced on `alive` is connected (empty counts as
/// connected).
pub fn mask_connected(adj: &[u32], alive: u32) -> bool {
    if alive == 0 {
        return true;
    }
    let start = alive.trailing_zeros();
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros();
        frontier &= frontier - 1;
        let new = adj[v as usize] & alive & !seen;
        seen |= new;
        frontier |= new;
    }
    seen == alive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> ChordalGraph {
        let mut g = ChordalGraph::path(n);
        g.add_edge(0, n as u32 - 1);
        g
    }

    #[test]
    fn small_examples() {
        let k4 = ChordalGraph::complete(4);
        assert!(k4.is_chordal());
        assert_eq!(k4.clique_number().unwrap(), 4);
        assert_eq!(k4.clique_count(2).unwrap(), 6);
        assert_eq!(k4.connectivity().unwrap(), 3);
        assert!(!cycle(4).is_chordal());
        let p3 = ChordalGraph::path(3);
        assert_eq!(p3.clique_count(2).unwrap(), 2);
        assert_eq!(p3.connectivity().unwrap(), 1);
        assert_eq!(ChordalGraph::path(7).diameter().unwrap(), 6);
        assert_eq!(ChordalGraph::complete(5).diameter().unwrap(), 1);
        let mut two = ChordalGraph::path(2);
        two.add_vertex();
        assert_eq!(two.connectivity().unwrap(), 0);
    }

    #[test]
    fn k_connected_convention() {
        assert!(ChordalGraph::complete(2).is_k_connected(2).unwrap());
        assert!(!ChordalGraph::complete(2).is_k_connected(3).unwrap());
        assert!(ChordalGraph::new(1).is_k_connected(1).unwrap());
        assert!(!ChordalGraph::path(3).is_k_connected(2).unwrap());
    }

    #[test]
    fn lex_bfs_visits_everything_once() {
        let g = ChordalGraph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5)]);
        let mut o = g.lex_bfs();
        assert_eq!(o[0], 0);
        o.sort();
        assert_eq!(o, vec![0, 1, 2, 3, 4, 5]);
        assert!(g.is_chordal());
    }
}
