use std::collections::HashMap;

use chordal_bgw::analytic::Analysis;
use chordal_bgw::trees::{
    degree_profile, fringe, fringe_at, fringe_counts, fringe_probability, sample_bgw, ConditionedMethod, ConditionedSampler, Fringe,
    SpineSampler, TwoTypeTree, WhiteRef,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn unconditioned_sizes_follow_the_size_law() {
    let a = Analysis::new(2, 1, 16, 1e-12).unwrap();
    let sampler = a.law.sampler().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = 20_000;
    let bins = 6;
    let mut counts = vec![0.0; bins + 1];
    for _ in 0..m {
        let n = match sample_bgw(&sampler, &mut rng, 1 << 20) {
            Ok(t) => t.white_count() as usize,
            Err(_) => usize::MAX,
        };
        counts[n.min(bins)] += 1.0;
    }
    let mut expected: Vec<f64> = (0..bins).map(|n| m as f64 * a.size_probability(n).unwrap()).collect();
    expected.push(m as f64 - expected.iter().sum::<f64>());
    assert!(chi_square_p(&counts, &expected) > 0.001, "{counts:?} vs {expected:?}");
}

/// Conditioned shapes must be drawn with probability proportional to the
/// product of table probabilities.
fn check_conditioned(sampler: &ConditionedSampler, a: &Analysis, n: u64, m: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashMap<Vec<(u32, u32)>, f64> = HashMap::new();
    for _ in 0..m {
        let (t, _) = sampler.sample(n, &mut rng, 1 << 30).unwrap();
        assert_eq!(t.white_count(), n);
        *seen.entry(t.offspring().collect()).or_insert(0.0) += 1.0;
    }
    let pn = a.size_probability(n as usize).unwrap();
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut covered = 0.0;
    for (shape, c) in &seen {
        let p: f64 = shape.iter().map(|&(x, z)| a.law.prob(x, z)).product::<f64>() / pn;
        covered += p;
        observed.push(*c);
        expected.push(p * m as f64);
    }
    assert!((covered - 1.0).abs() < 1e-3, "observed shapes cover {covered}");
    assert!(chi_square_p(&observed, &expected) > 0.001);
}

#[test]
fn conditioned_shapes_follow_product_weights() {
    let cayley = Analysis::new(1, 1, 16, 1e-12).unwrap();
    let s = ConditionedSampler::new(&cayley.law).unwrap();
    assert_eq!(s.method(), ConditionedMethod::CycleLemma { ratio: 1 });
    check_conditioned(&s, &cayley, 4, 40_000, 2);
    let rejection = ConditionedSampler::with_method(&cayley.law, Some(true)).unwrap();
    check_conditioned(&rejection, &cayley, 4, 40_000, 3);

    let a = Analysis::new(2, 1, 16, 1e-12).unwrap();
    let s = ConditionedSampler::new(&a.law).unwrap();
    assert_eq!(s.method(), ConditionedMethod::CycleLemma { ratio: 1 });
    check_conditioned(&s, &a, 3, 40_000, 4);
    let rejection = ConditionedSampler::with_method(&a.law, Some(true)).unwrap();
    assert_eq!(rejection.method(), ConditionedMethod::Rejection);
    check_conditioned(&rejection, &a, 3, 40_000, 5);

    let dec = Analysis::new(3, 2, 16, 1e-6).unwrap();
    let s = ConditionedSampler::new(&dec.law).unwrap();
    assert_eq!(s.method(), ConditionedMethod::Rejection);
}

#[test]
fn spine_has_the_requested_height() {
    let a = Analysis::new(2, 1, 16, 1e-12).unwrap();
    let s = SpineSampler::new(&a.law).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for ell in [0u32, 1, 5, 20] {
        let m = s.sample(ell, &mut rng, 1 << 22).unwrap();
        assert_eq!(m.spine.len(), ell as usize + 1);
        assert_eq!(m.mark.parent, *m.spine.last().unwrap());
        assert_eq!(m.tree.white_height(m.mark), ell + 1);
        for w in m.spine.windows(2) {
            assert_eq!(m.tree.parent(w[1]), Some(w[0]));
        }
        assert!(matches!(fringe(&m, ell + 2), Fringe::Undefined));
    }
}

#[test]
fn cayley_fringe_of_a_leaf_parent() {
    let a = Analysis::new(1, 1, 16, 1e-12).unwrap();
    let tau = Fringe::Tree { offspring: vec![(1, 1), (0, 0)], mark: WhiteRef { parent: 0, index: 0 } };
    let p = fringe_probability(&a.law, &tau).unwrap();
    assert!((p - (-2.0f64).exp()).abs() < 1e-12);
    assert_eq!(fringe_probability(&a.law, &Fringe::Leaf).unwrap(), 1.0);

    let s = ConditionedSampler::new(&a.law).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut hits, mut total) = (0u64, 0u64);
    for _ in 0..20 {
        let (t, _) = s.sample(2000, &mut rng, 1 << 20).unwrap();
        let (counts, _) = fringe_counts(&t, 1, 64);
        hits += counts.get(&tau).copied().unwrap_or(0);
        total += t.white_count();
    }
    let freq = hits as f64 / total as f64;
    assert!((freq - p).abs() < 0.01, "{freq} vs {p}");
}

#[test]
fn fringe_counts_agree_with_pointwise_fringes() {
    let a = Analysis::new(2, 1, 16, 1e-12).unwrap();
    let s = ConditionedSampler::new(&a.law).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (t, _) = s.sample(60, &mut rng, 1 << 24).unwrap();
    for h in 0..3 {
        let (counts, large) = fringe_counts(&t, h, u64::MAX);
        assert_eq!(large, 0);
        let mut direct: HashMap<Fringe, u64> = HashMap::new();
        for i in 0..t.white_count() {
            *direct.entry(fringe_at(&t, t.white(i), h)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), direct.len());
        for (f, c) in counts {
            assert_eq!(direct[&f], c);
        }
    }
}

#[test]
fn degree_profile_totals() {
    let t = TwoTypeTree::from_preorder(vec![2, 0, 1, 0], vec![1, 0, 2, 1]).unwrap();
    let p = degree_profile(&t);
    assert_eq!(p.black, 4);
    assert_eq!(p.white, 4);
    assert_eq!(p.by_black_degree, vec![2, 1, 1]);
    assert_eq!(p.max_white_degree, 2);
    let edges: u64 = (0..3).map(|d| d as u64 * p.b(d)).sum();
    assert_eq!(edges + 1, p.black);
}
