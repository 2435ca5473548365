use std::collections::BTreeMap;

use chordal_bgw::chordal::ChordalGraph;
use chordal_bgw::gfchain::{brute_force_class, brute_force_tally, ChainConfig, ChainDepth, GFChain, Tracking};
use num_bigint::BigInt;
use num_traits::Zero;

fn binom_big(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// C(n,t)·(t(n−t)+1)^{n−t−2}, with the n = t+1 case equal to 1.
fn ktree_count(t: u64, n: u64) -> BigInt {
    if n < t {
        return BigInt::zero();
    }
    if n == t {
        return BigInt::from(1);
    }
    let base = BigInt::from(t * (n - t) + 1);
    let e = n as i64 - t as i64 - 2;
    if e < 0 {
        return binom_big(n, t) / (t * (n - t) + 1);
    }
    binom_big(n, t) * base.pow(e as u32)
}

#[test]
fn oracle_examples() {
    let paths = brute_force_class(1, 1, 3).unwrap();
    assert_eq!(paths.len(), 3);
    assert!(paths.iter().all(|g| g.edge_count() == 2));
    assert_eq!(brute_force_class(2, 2, 4).unwrap().len(), 6);
    for (t, k) in [(2, 1), (2, 2), (3, 2)] {
        let c = brute_force_class(t, k, k + 1).unwrap();
        assert_eq!(c, vec![ChordalGraph::complete(k + 1)]);
    }
    assert!(brute_force_class(1, 1, 9).is_err());
}

#[test]
fn chain_matches_brute_force_up_to_six() {
    let classes = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)];
    let chains: Vec<GFChain> = classes.iter().map(|&(t, k)| GFChain::exact(ChainConfig::new(t, k, 6)).unwrap()).collect();
    for n in 1..=6usize {
        let tally = brute_force_tally(&classes, n).unwrap();
        for (c, &(t, k)) in classes.iter().enumerate() {
            let (members, clique_weight) = tally[c];
            assert_eq!(chains[c].count(n, false).unwrap(), BigInt::from(members), "(t,k)=({t},{k}) n={n}");
            if n >= k {
                // C(n,k)·|rooted at n−k| = Σ n_k over members
                let rooted = chains[c].count(n - k, true).unwrap();
                assert_eq!(binom_big(n as u64, k as u64) * rooted, BigInt::from(clique_weight), "rooted identity ({t},{k}) n={n}");
            }
        }
    }
}

#[test]
fn closed_forms() {
    for t in 1..=3usize {
        let c = GFChain::exact(ChainConfig::new(t, t, 30)).unwrap();
        for n in t..=30 {
            assert_eq!(c.count(n, false).unwrap(), ktree_count(t as u64, n as u64), "t={t} n={n}");
        }
    }
    assert_eq!(ktree_count(2, 4), BigInt::from(6));
}

#[test]
fn rooted_depth_agrees_with_complete() {
    let full = GFChain::exact(ChainConfig::new(3, 2, 8)).unwrap();
    let rooted = GFChain::exact(ChainConfig::new(3, 2, 8).depth(ChainDepth::Rooted)).unwrap();
    for n in 0..=8 {
        assert_eq!(full.count(n, true).unwrap(), rooted.count(n, true).unwrap());
    }
    assert!(rooted.count(3, false).is_err());
}

#[test]
fn full_tracking_matches_clique_profiles() {
    // (t,k) = (2,1) and (3,1): counts by (n, #edges, #triangles, …).
    for (t, k) in [(2usize, 1usize), (3, 1), (3, 2)] {
        let chain = GFChain::exact(ChainConfig::new(t, k, 5).tracking(Tracking::Full)).unwrap();
        let by = chain.unrooted_counts_by_cliques().unwrap();
        for n in 1..=5usize {
            let mut want: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
            for g in brute_force_class(t, k, n).unwrap() {
                let mut key = vec![n as u32];
                for j in 2..=t {
                    key.push(g.clique_count(j).unwrap() as u32);
                }
                *want.entry(key).or_insert_with(BigInt::zero) += 1;
            }
            let got: BTreeMap<Vec<u32>, BigInt> = by.iter().filter(|(e, _)| e[0] == n as u32).map(|(e, c)| (e.clone(), c.clone())).collect();
            assert_eq!(got, want, "(t,k)=({t},{k}) n={n}");
        }
    }
}

#[test]
fn decoration_counts() {
    let c = GFChain::exact(ChainConfig::new(2, 2, 6)).unwrap();
    assert_eq!(c.decoration_count(0, 0).unwrap(), BigInt::from(1));
    assert_eq!(c.decoration_count(2, 1).unwrap(), BigInt::from(1));
    for m in 0..=3 {
        assert_eq!(c.decoration_count(2 * m, m).unwrap(), BigInt::from(1));
        assert_eq!(c.decoration_count(2 * m + 1, m).unwrap(), BigInt::zero());
    }
    let c = GFChain::exact(ChainConfig::new(1, 1, 6)).unwrap();
    for b in 0..=6 {
        assert_eq!(c.decoration_count(b, b).unwrap(), BigInt::from(1));
    }
    let c = GFChain::exact(ChainConfig::new(2, 1, 6)).unwrap();
    assert_eq!(c.decoration_count(1, 1).unwrap(), BigInt::from(1));
    assert!(c.decoration_count(1, 7).is_err());
}

#[test]
fn clique_lower_bound_on_members() {
    for (t, k) in [(2usize, 1usize), (2, 2), (3, 2)] {
        for n in k..=6 {
            for g in brute_force_class(t, k, n).unwrap() {
                let nk = g.clique_count(k).unwrap() as usize;
                assert!(nk >= k * (n - k) + 1);
            }
        }
    }
}

#[test]
fn clique_tree_connectivity_matches_exhaustive() {
    for n in 1..=6 {
        for g in brute_force_class(5, 1, n).unwrap() {
            assert_eq!(g.connectivity().unwrap(), g.connectivity_exhaustive().unwrap(), "{:?}", g.edges());
        }
    }
}
