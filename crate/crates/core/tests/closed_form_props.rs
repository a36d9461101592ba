use dkp_aim::closed_form::{
    general_aim_eigenvalue, general_default_x0, general_eigenfunction, general_eigenfunction_poly, general_eigenvalue,
    general_hypergeometric, general_residual, hyp_terminating, tabulated_eigenvalue, GeneralFamilyParams,
};
use dkp_aim::{BigReal, Precision};
use proptest::prelude::*;

const P: Precision = Precision::digits(120);

fn family(a: f64, b: f64, m: u32, big_n: i32) -> GeneralFamilyParams {
    GeneralFamilyParams::new(
        BigReal::from_f64(P, a),
        BigReal::from_f64(P, b),
        BigReal::from_int(P, m.into()),
        big_n,
    )
    .unwrap()
}

fn close(x: &BigReal, y: &BigReal, digits: i32) -> bool {
    (x - y).abs() <= &P.ten_pow_neg(digits) * &(&x.abs().max(y.abs()) + &BigReal::one(P))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn tabulated_forms_match_the_general_formula(
        a in -2.0f64..3.0,
        b in 0.1f64..3.0,
        m in 0u32..=3,
    ) {
        for big_n in -1..=3 {
            let p = family(a, b, m, big_n);
            for n in 0..=6 {
                let general = general_eigenvalue(&p, n);
                let tab = tabulated_eigenvalue(&p, n).unwrap();
                prop_assert!(close(&general, &tab, 100), "N={} n={}", big_n, n);
            }
        }
    }

    #[test]
    fn eigenfunction_solves_the_ode(a in -1.0f64..3.0, b in 0.1f64..3.0, m in 0u32..=3, big_n in -1i32..=3, n in 0usize..=6) {
        let p = family(a, b, m, big_n);
        let w = general_eigenvalue(&p, n);
        let y = general_eigenfunction_poly(&p, n).unwrap();
        let size = y.terms().map(|(_, c)| c.abs()).reduce(BigReal::max).unwrap();
        let size = &size * &(&(&w.abs() + &p.a.abs()) + &BigReal::from_int(P, (m as i64 + 2) * (n as i64 + 2).pow(2)));
        let residual = general_residual(&p, &w, &y);
        for (e, c) in residual.terms() {
            prop_assert!(c.abs() < &size * &P.ten_pow_neg(90), "x^{} coefficient {}", e, c.to_sci_string(4));
        }
    }

    #[test]
    fn eigenfunction_is_a_polynomial_in_the_step_power(a in -1.0f64..3.0, b in 0.1f64..3.0, m in 0u32..=3, big_n in -1i32..=3, n in 0usize..=6) {
        let p = family(a, b, m, big_n);
        let y = general_eigenfunction_poly(&p, n).unwrap();
        let step = p.step() as i32;
        prop_assert_eq!(y.max_exponent(), Some(n as i32 * step));
        prop_assert!(y.terms().all(|(e, _)| e >= 0 && e % step == 0));
        // the series form and the summed polynomial agree inside the domain
        let x = p.domain_end().div_int(3);
        let direct = general_eigenfunction(&p, n, &x).unwrap();
        prop_assert!(close(&direct, &y.eval(&x).unwrap(), 90));
        prop_assert_eq!(hyp_terminating(&general_hypergeometric(&p, n), &BigReal::zero(P)).unwrap(), BigReal::one(P));
    }
}

#[test]
fn aim_reproduces_the_general_family() {
    let cases = [
        (1.0, 1.0, 0, 0, 1),
        (0.5, 2.0, 1, -1, 3),
        (2.0, 0.5, 2, 1, 2),
        (0.0, 1.5, 0, 2, 1),
        (1.0, 0.3, 1, 0, 3),
    ];
    for (a, b, m, big_n, n) in cases {
        let p = family(a, b, m, big_n);
        let w = general_aim_eigenvalue(&p, n, &general_default_x0(&p)).unwrap();
        assert!(
            close(&w, &general_eigenvalue(&p, n), 25),
            "a={a} b={b} m={m} N={big_n} n={n}: {}",
            w.to_sci_string(30)
        );
    }
}
