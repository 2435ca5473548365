use std::collections::HashMap;

use chordal_bgw::chordal::sampler::cliques_of_size;
use chordal_bgw::chordal::{blow_up, deroot, ChordalGraph, Decoration, Deroot, GraphSampler, RecursiveTables, SampleMode};
use chordal_bgw::error::Error;
use chordal_bgw::gfchain::{brute_force_class, ChainConfig, ChainDepth, GFChain};
use chordal_bgw::trees::TwoTypeTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labelled members on `n + k` vertices whose first `k` vertices form a clique.
fn rooted_class(t: usize, k: usize, n: usize) -> Vec<ChordalGraph> {
    let root: Vec<u32> = (0..k as u32).collect();
    brute_force_class(t, k, n + k).unwrap().into_iter().filter(|g| g.is_clique(&root)).collect()
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn tally<F: FnMut() -> ChordalGraph>(class: &[ChordalGraph], draws: usize, mut draw: F) -> Vec<u64> {
    let index: HashMap<Vec<(u32, u32)>, usize> = class.iter().enumerate().map(|(i, g)| (g.edges(), i)).collect();
    let mut counts = vec![0u64; class.len()];
    for _ in 0..draws {
        let g = draw();
        counts[*index.get(&g.edges()).expect("sample lies in the class")] += 1;
    }
    counts
}

#[test]
fn rooted_class_sizes_match_counts() {
    for (t, k, n) in [(1, 1, 3), (2, 1, 3), (2, 2, 3), (3, 2, 2), (3, 3, 2)] {
        let chain = GFChain::exact(ChainConfig::new(t, k, n).depth(ChainDepth::Rooted)).unwrap();
        let count = chain.count(n, true).unwrap();
        assert_eq!(count, (rooted_class(t, k, n).len() as u64).into(), "({t},{k}) n={n}");
    }
}

#[test]
fn rooted_samplers_are_uniform() {
    for (t, k, n) in [(1, 1, 2), (2, 1, 3), (2, 2, 3), (3, 2, 2)] {
        let class = rooted_class(t, k, n);
        for mode in [SampleMode::RecursiveExact, SampleMode::BlowupRejection] {
            let s = GraphSampler::new(t, k, n, mode).unwrap();
            let mut r = rng(7);
            let counts = tally(&class, 200 * class.len(), || s.rooted(n as u32, &mut r).unwrap());
            let p = chi_square_p(&counts);
            assert!(p > 0.001, "({t},{k}) n={n} {mode:?}: p = {p}");
        }
    }
}

#[test]
fn reweighted_samples_are_uniform_unrooted() {
    let class = brute_force_class(2, 1, 5).unwrap();
    let s = GraphSampler::new(2, 1, 4, SampleMode::RecursiveExact).unwrap();
    let mut r = rng(11);
    let counts = tally(&class, 100 * class.len(), || s.unrooted(4, Deroot::Reweight, &mut r, 1000).unwrap().0);
    assert!(chi_square_p(&counts) > 0.001);
}

#[test]
fn samples_are_members() {
    for (t, k) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)] {
        for mode in [SampleMode::RecursiveExact, SampleMode::BlowupRejection] {
            let s = GraphSampler::new(t, k, 30, mode).unwrap();
            let mut r = rng(3);
            for _ in 0..20 {
                let g = s.rooted(30, &mut r).unwrap();
                assert_eq!(g.n(), 30 + k);
                assert_eq!(g.root_clique.as_deref(), Some(&(0..k as u32).collect::<Vec<_>>()[..]));
                let rep = g.verify_member(t, k);
                assert!(rep.ok, "({t},{k}) {mode:?}: {rep:?}");
                let nk = g.clique_count(k).unwrap();
                assert!(nk >= (k * (30 + k - k) + 1) as u64);
            }
        }
    }
}

#[test]
fn decoration_examples() {
    let tables = RecursiveTables::build(2, 1, 6, false).unwrap();
    let mut r = rng(1);
    let bare = tables.decoration(0, 0, &mut r).unwrap();
    assert_eq!(bare.graph.n(), 1);
    assert!(bare.cliques.is_empty());
    let edge = tables.decoration(1, 1, &mut r).unwrap();
    assert_eq!(edge.graph.edges(), vec![(0, 1)]);
    assert_eq!(edge.cliques, vec![vec![1]]);
    assert!(matches!(tables.decoration(1, 2, &mut r), Err(Error::Domain(_))));
    assert!(matches!(tables.decoration(7, 7, &mut r), Err(Error::Range(_))));

    // At k = t every component is a (t+1)-clique on the root plus one vertex.
    let top = RecursiveTables::build(3, 3, 6, false).unwrap();
    for m in 0..4u32 {
        let d = top.decoration(3 * m, m, &mut r).unwrap();
        assert_eq!(d.graph.n(), 3 + m as usize);
        assert_eq!(d.graph.edge_count(), 3 + 3 * m as usize);
        assert_eq!(d.cliques.len(), 3 * m as usize);
    }
    assert!(matches!(top.decoration(2, 1, &mut r), Err(Error::Domain(_))));
}

#[test]
fn blow_up_examples() {
    let single = TwoTypeTree::root_only();
    let bare = Decoration { graph: ChordalGraph::complete(2), cliques: vec![] };
    let b = blow_up(&single, &[bare], 2).unwrap();
    assert_eq!(b.graph.n(), 2);
    assert_eq!(b.graph.edges(), vec![(0, 1)]);

    // Root with one white and one black child, which has one white child.
    let tree = TwoTypeTree::from_preorder(vec![1, 0], vec![1, 1]).unwrap();
    let edge = Decoration { graph: ChordalGraph::path(2), cliques: vec![vec![1]] };
    let leaf = Decoration { graph: ChordalGraph::path(2), cliques: vec![] };
    let b = blow_up(&tree, &[edge.clone(), leaf.clone()], 1).unwrap();
    assert_eq!(b.graph.edges(), vec![(0, 1), (1, 2)]);
    assert_eq!(b.white_vertex, vec![1, 2]);
    assert!(b.graph.verify_member(1, 1).ok);
    assert!(matches!(blow_up(&tree, &[leaf.clone(), leaf], 1), Err(Error::Domain(_))));
}

#[test]
fn blow_up_clique_counts_come_from_decorations() {
    let s = GraphSampler::new(3, 2, 30, SampleMode::BlowupRejection).unwrap();
    let tables = RecursiveTables::build(3, 2, 30, false).unwrap();
    let mut r = rng(5);
    for _ in 0..20 {
        let (tree, b) = s.blown_up(25, &mut r).unwrap();
        assert_eq!(b.graph.n(), 2 + tree.white_count() as usize);
        assert_eq!(b.graph.clique_count(2).unwrap(), tree.black_count() as u64);
        // Recount j-cliques by brute force and from the decorations alone.
        let decorations: Vec<Decoration> =
            (0..tree.black_count() as u32).map(|v| tables.decoration(tree.xi(v), tree.zeta(v), &mut r).unwrap()).collect();
        let g = blow_up(&tree, &decorations, 2).unwrap().graph;
        for j in 1..=4 {
            let from_decorations: usize = decorations
                .iter()
                .map(|d| cliques_of_size(&d.graph, j).unwrap().iter().filter(|c| c.iter().any(|&v| v >= 2)).count())
                .sum::<usize>()
                + [0, 2, 1, 0, 0][j];
            assert_eq!(cliques_of_size(&g, j).unwrap().len(), from_decorations);
        }
    }
}

#[test]
fn deroot_modes() {
    let s = GraphSampler::new(2, 1, 10, SampleMode::RecursiveExact).unwrap();
    let mut r = rng(9);
    let g = s.rooted(10, &mut r).unwrap();
    let f = deroot(&g, Deroot::Forget, 1, &mut r).unwrap().unwrap();
    assert_eq!(f.root_clique, None);
    assert_eq!(f.edges(), g.edges());
    // At k = 1 every graph has n_1 = k(n-k)+1 vertices, so nothing is rejected.
    let h = deroot(&g, Deroot::Reweight, 1, &mut r).unwrap().unwrap();
    assert_eq!(h.edge_count(), g.edge_count());
}

#[test]
fn tree_diameter_matches_double_sweep() {
    let s = GraphSampler::new(1, 1, 100, SampleMode::BlowupRejection).unwrap();
    let mut r = rng(4);
    for _ in 0..10 {
        let g = s.rooted(99, &mut r).unwrap();
        let d0 = g.bfs(0);
        let far = (0..g.n()).max_by_key(|&v| d0[v]).unwrap();
        let sweep = *g.bfs(far as u32).iter().max().unwrap();
        assert_eq!(g.diameter().unwrap(), sweep);
        assert_eq!(g.diameter_all_pairs().unwrap(), g.diameter().unwrap());
    }
}

#[test]
fn seeded_samples_are_reproducible() {
    let s = GraphSampler::new(2, 1, 200, SampleMode::BlowupRejection).unwrap();
    let a = s.rooted(200, &mut rng(42)).unwrap();
    let b = s.rooted(200, &mut rng(42)).unwrap();
    assert_eq!(a.edges(), b.edges());
}
