use std::collections::BTreeMap;

use chordal_experiments::stats::{chi_square_sf, ks_distance, mean, neville_at_zero, ols, shape, total_variation, variance};
use chordal_experiments::{Check, Config, Rule, Stat};
use proptest::prelude::*;

#[test]
fn config_parses_comments_lists_and_tolerances() {
    let cfg: Config = "# header\nt = 2\nk=1\nn_grid = 10, 20 ,40\n\ntol.tv = 0.02\n".parse().unwrap();
    assert_eq!(cfg.require::<usize>("t").unwrap(), 2);
    assert_eq!(cfg.list::<usize>("n_grid").unwrap(), Some(vec![10, 20, 40]));
    assert_eq!(cfg.tolerance("tv").unwrap(), Some(0.02));
    assert_eq!(cfg.tolerance("missing").unwrap(), None);
    assert!(cfg.require::<usize>("replicas").is_err());
    assert!(cfg.get::<usize>("tol.tv").is_err());
}

#[test]
fn config_rejects_malformed_and_duplicate_lines() {
    assert!("t 2".parse::<Config>().is_err());
    assert!("t = 1\nt = 2".parse::<Config>().is_err());
}

#[test]
fn chi_square_tail_matches_known_quantiles() {
    assert!((chi_square_sf(3.841458820694124, 1).unwrap() - 0.05).abs() < 1e-9);
    assert!((chi_square_sf(18.307038053275146, 10).unwrap() - 0.05).abs() < 1e-9);
}

#[test]
fn ols_recovers_an_exact_line() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
    let fit = ols(&x, &y).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12 && (fit.intercept - 0.5).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(ols(&x[..2], &y[..2]).is_err());
}

#[test]
fn neville_extrapolates_polynomials_exactly() {
    let x = [0.5, 0.25, 0.125];
    let y: Vec<f64> = x.iter().map(|v| 3.0 + v - 4.0 * v * v).collect();
    assert!((neville_at_zero(&x, &y) - 3.0).abs() < 1e-12);
}

#[test]
fn shape_of_a_symmetric_two_point_law() {
    let (skew, kurt) = shape(&[-1.0, 1.0, -1.0, 1.0]);
    assert!(skew.abs() < 1e-12 && (kurt + 2.0).abs() < 1e-12);
}

#[test]
fn check_rules() {
    let s = |v| Stat::exact(v);
    assert_eq!(Check::new("a", s(1.05), Some(1.0), Rule::RelWithin, Some(0.1)).passed, Some(true));
    assert_eq!(Check::new("a", s(1.2), Some(1.0), Rule::AbsWithin, Some(0.1)).passed, Some(false));
    assert_eq!(Check::new("a", s(0.01), None, Rule::Below, Some(0.02)).passed, Some(true));
    assert_eq!(Check::new("a", s(0.0), None, Rule::Above, Some(0.0)).passed, Some(false));
    assert_eq!(Check::new("a", s(0.5), None, Rule::Below, None).passed, None);
    assert_eq!(Check::holds("a", false, 1).passed, Some(false));
}

proptest! {
    #[test]
    fn ks_is_a_bounded_symmetric_distance(a in prop::collection::vec(-10.0f64..10.0, 1..40), b in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let d = ks_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - ks_distance(&b, &a)).abs() < 1e-12);
        prop_assert!(ks_distance(&a, &a) == 0.0);
    }

    #[test]
    fn tv_is_bounded_and_symmetric(p in prop::collection::vec(0.0f64..1.0, 1..12), q in prop::collection::vec(0.0f64..1.0, 1..12)) {
        let norm = |v: &[f64]| -> BTreeMap<usize, f64> {
            let s: f64 = v.iter().sum::<f64>().max(1e-12);
            v.iter().enumerate().map(|(i, x)| (i, x / s)).collect()
        };
        let (p, q) = (norm(&p), norm(&q));
        let d = total_variation(&p, &q);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - total_variation(&q, &p)).abs() < 1e-12);
    }

    #[test]
    fn variance_is_shift_invariant(xs in prop::collection::vec(-100.0f64..100.0, 2..50), c in -1e3f64..1e3) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((variance(&xs) - variance(&shifted)).abs() < 1e-6 * (1.0 + variance(&xs)));
        prop_assert!((mean(&shifted) - mean(&xs) - c).abs() < 1e-9 * (1.0 + c.abs()));
    }
}
