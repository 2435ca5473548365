use chordal_bgw::series::{rat, Coeff, MultiSeries, Var};
use num_rational::BigRational;
use proptest::prelude::*;

const X: Var = Var::X(1);
const Y: Var = Var::X(2);
const BOUNDS: [u32; 2] = [4, 3];

fn series(coeffs: &[(u32, u32, i64, i64)], constant: bool) -> MultiSeries {
    let terms = coeffs
        .iter()
        .filter(|&&(i, j, _, _)| constant || i + j > 0)
        .map(|&(i, j, p, q)| (vec![i, j], rat(p, q)))
        .collect();
    MultiSeries::from_terms(&[X, Y], &BOUNDS, terms).unwrap()
}

fn to_float(s: &MultiSeries) -> MultiSeries<f64> {
    let terms = s.terms().map(|(e, c)| (e.clone(), c.to_f64())).collect();
    MultiSeries::from_terms(s.vars(), s.bounds(), terms).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(u32, u32, i64, i64)>> {
    prop::collection::vec((0..=4u32, 0..=3u32, -6..=6i64, 1..=5i64), 0..8)
}

fn close(a: &MultiSeries<f64>, b: &MultiSeries<f64>) -> bool {
    let scale = a.terms().map(|(_, c)| c.abs()).fold(1.0, f64::max);
    a.terms().all(|(e, c)| (c - b.get(e)).abs() <= 1e-9 * scale) && b.terms().all(|(e, c)| (c - a.get(e)).abs() <= 1e-9 * scale)
}

proptest! {
    #[test]
    fn product_commutes_and_associates(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(&a, true), series(&b, true), series(&c, true));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn exp_turns_sums_into_products(a in coeffs(), b in coeffs()) {
        let (a, b) = (series(&a, false), series(&b, false));
        let lhs = a.add(&b).unwrap().exp().unwrap();
        let rhs = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn differentiation_inverts_integration(a in coeffs()) {
        let a = series(&a, true);
        let back = a.integrate_extend(X).unwrap().differentiate(X).unwrap();
        for (e, c) in a.terms() {
            prop_assert_eq!(&back.get(e), c);
        }
        prop_assert_eq!(back.terms().count(), a.terms().count());
    }

    #[test]
    fn float_ring_tracks_exact_ring(a in coeffs(), b in coeffs()) {
        let (a, b) = (series(&a, false), series(&b, true));
        let exact = a.exp().unwrap().mul(&b).unwrap();
        let float = to_float(&a).exp().unwrap().mul(&to_float(&b)).unwrap();
        prop_assert!(close(&to_float(&exact), &float));
    }

    #[test]
    fn ln_abs_agrees_across_rings(p in 1..1_000_000i64, q in 1..1_000_000i64) {
        let r: BigRational = rat(p, q);
        prop_assert!((r.ln_abs() - r.to_f64().ln_abs()).abs() < 1e-12);
    }
}

#[test]
fn exp_rejects_constant_term() {
    let s = series(&[(0, 0, 1, 1)], true);
    assert!(s.exp().is_err());
}
