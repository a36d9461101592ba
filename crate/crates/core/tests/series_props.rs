use dkp_aim::series::{poly_diff, poly_eval, poly_mul, GammaSeries, LaurentPoly, Ring, Var};
use dkp_aim::{BigReal, Precision};
use proptest::prelude::*;

const P: Precision = Precision::digits(120);

/// Small integer coefficients keep every product exact at 120 digits.
fn int_poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-3i32..6, -9i64..10), 0..6).prop_map(|terms| LaurentPoly::from_ints(Var::R, P, &terms))
}

fn real_poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-3i32..6, -5.0f64..5.0), 1..6).prop_map(|terms| {
        LaurentPoly::from_terms(Var::R, P, terms.into_iter().map(|(e, c)| (e, BigReal::from_f64(P, c))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in int_poly(), b in int_poly(), c in int_poly()) {
        prop_assert_eq!(Ring::mul(&Ring::mul(&a, &b), &c), Ring::mul(&a, &Ring::mul(&b, &c)));
        prop_assert_eq!(Ring::add(&Ring::add(&a, &b), &c), Ring::add(&a, &Ring::add(&b, &c)));
        prop_assert_eq!(Ring::mul(&a, &b), Ring::mul(&b, &a));
        prop_assert_eq!(Ring::add(&a, &b), Ring::add(&b, &a));
        prop_assert_eq!(
            Ring::mul(&a, &Ring::add(&b, &c)),
            Ring::add(&Ring::mul(&a, &b), &Ring::mul(&a, &c))
        );
        prop_assert!(Ring::sub(&a, &a).is_zero());
    }

    #[test]
    fn leibniz(a in int_poly(), b in int_poly()) {
        let lhs = poly_diff(&poly_mul(&a, &b).unwrap());
        let rhs = Ring::add(&Ring::mul(&poly_diff(&a), &b), &Ring::mul(&a, &poly_diff(&b)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_is_multiplicative(a in real_poly(), b in real_poly(), x in 0.1f64..3.0) {
        let x0 = BigReal::from_f64(P, x);
        let ab = poly_eval(&poly_mul(&a, &b).unwrap(), &x0).unwrap();
        let prod = &poly_eval(&a, &x0).unwrap() * &poly_eval(&b, &x0).unwrap();
        let tol = P.ten_pow_neg(P.decimal_digits() as i32 - 6);
        // relative to the largest term, so cancellations do not count
        let scale = a.terms().chain(b.terms()).map(|(e, c)| (c * &x0.powi(e)).abs()).reduce(BigReal::max).unwrap();
        let scale = &scale.square() + &BigReal::one(P);
        prop_assert!((&ab - &prod).abs() <= &tol * &scale);
    }

    #[test]
    fn order_zero_gamma_series_is_the_polynomial_ring(a in int_poly(), b in int_poly()) {
        let ga = GammaSeries::new(vec![a.clone()]);
        let gb = GammaSeries::new(vec![b.clone()]);
        prop_assert_eq!(Ring::mul(&ga, &gb).coeff(0).clone(), Ring::mul(&a, &b));
        prop_assert_eq!(Ring::add(&ga, &gb).coeff(0).clone(), Ring::add(&a, &b));
        prop_assert_eq!(Ring::sub(&ga, &gb).coeff(0).clone(), Ring::sub(&a, &b));
        prop_assert_eq!(ga.derivative().coeff(0).clone(), poly_diff(&a));
        prop_assert_eq!(Ring::mul(&ga, &gb).order(), 0);
    }
}
