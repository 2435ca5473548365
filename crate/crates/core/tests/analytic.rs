use chordal_bgw::analytic::{Analysis, LawOptions, OffspringLaw, Offspring};
use chordal_bgw::error::Error;
use chordal_bgw::gfchain::{ChainConfig, GFChain};

fn poisson(k: u32) -> f64 {
    (-1.0f64).exp() / (1..=k).map(f64::from).product::<f64>()
}

#[test]
fn cayley_law_is_poisson_on_the_diagonal() {
    let a = Analysis::new(1, 1, 64, 1e-12).unwrap();
    assert!((a.constants.rho.value - (-1.0f64).exp()).abs() < 1e-6);
    for e in &a.law.entries {
        assert_eq!(e.xi, e.zeta);
        assert!((e.p - poisson(e.zeta)).abs() < 1e-8, "{e:?}");
    }
    assert!((a.law.mean_xi() - 1.0).abs() < 1e-8 + a.law.deficit);
    assert!((a.size_probability(1).unwrap() - (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn offspring_laws_are_critical() {
    for (t, k) in [(1, 1), (2, 1), (2, 2), (3, 3)] {
        let a = Analysis::new(t, k, 64, 1e-12).unwrap();
        let gap = (a.law.mean_xi() - 1.0).abs();
        assert!(gap < 1e-8 + a.law.deficit, "({t},{k}): E[xi] - 1 = {gap:e}");
        assert!(a.law.total() <= 1.0 + 1e-12);
    }
}

#[test]
fn size_biased_laws_are_normalized() {
    let a = Analysis::new(2, 1, 64, 1e-12).unwrap();
    for biased in [a.law.black_biased(), a.law.white_biased()] {
        let total: f64 = biased.iter().map(|e| e.p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    assert!(a.law.black_biased().iter().all(|e| e.xi > 0));
    assert!(a.law.white_biased().iter().all(|e| e.zeta > 0));
}

#[test]
fn size_probabilities_match_exact_counts() {
    // P(#2 T = n) = |G^(k)_{k,n}| rho^n / (n! y).
    let a = Analysis::new(2, 1, 40, 1e-12).unwrap();
    let exact = GFChain::exact(ChainConfig::new(2, 1, 12)).unwrap();
    let (rho, y) = (a.constants.rho.value, a.constants.y.value);
    for n in 1..=12usize {
        let count = exact.count(n, true).unwrap().to_string().parse::<f64>().unwrap();
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let want = count * rho.powi(n as i32) / fact / y;
        let got = a.size_probability(n).unwrap();
        assert!((got - want).abs() < 1e-10 * want, "n={n}: {got} vs {want}");
    }
}

#[test]
fn two_trees_have_deterministic_offspring_ratio() {
    let a = Analysis::new(2, 2, 64, 1e-12).unwrap();
    assert!(a.law.entries.iter().all(|e| e.xi == 2 * e.zeta));
    assert!((a.constants.var_xi.value - 2.0).abs() < 1e-8);
}

#[test]
fn law_options_reject_excess_deficit() {
    let mut cfg = chordal_bgw::analytic::AnalysisConfig::new(2, 1, 32, 1e-12);
    cfg.law = LawOptions { cutoff: Some(4), max_deficit: 1e-6, ..LawOptions::default() };
    assert!(matches!(Analysis::with_config(cfg), Err(Error::Range(_))));
}

#[test]
fn table_entries_are_validated() {
    assert!(OffspringLaw::from_entries(vec![Offspring { xi: 0, zeta: 0, p: 1.5 }]).is_err());
    let law = OffspringLaw::from_entries(vec![
        Offspring { xi: 2, zeta: 1, p: 0.25 },
        Offspring { xi: 0, zeta: 0, p: 0.75 },
    ])
    .unwrap();
    assert_eq!(law.prob(2, 1), 0.25);
    assert_eq!(law.prob(1, 1), 0.0);
    assert!((law.mean_xi() - 0.5).abs() < 1e-15);
}
