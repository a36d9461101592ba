use dkp_aim::oracle::{
    coulomb_operator, coulomb_xi, oscillator_operator, richardson_eigenvalues, sturm_count, tridiagonal_eigenvalues,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dense(diag: &[f64], off: f64) -> DMatrix<f64> {
    let n = diag.len();
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => diag[i],
        1 => off,
        _ => 0.0,
    })
}

fn sorted_eigenvalues(diag: &[f64], off: f64) -> Vec<f64> {
    let mut v: Vec<f64> = dense(diag, off).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sturm_count_matches_dense_eigenvalues(
        diag in prop::collection::vec(-10.0f64..10.0, 2..40),
        off in -3.0f64..3.0,
        probe in -20.0f64..20.0,
    ) {
        let eig = sorted_eigenvalues(&diag, off);
        // skip probes that sit on an eigenvalue to rounding accuracy
        prop_assume!(eig.iter().all(|e| (e - probe).abs() > 1e-9));
        prop_assert_eq!(sturm_count(&diag, off, probe), eig.iter().filter(|e| **e < probe).count());
    }

    #[test]
    fn bisection_matches_dense_eigenvalues(diag in prop::collection::vec(-10.0f64..10.0, 2..40), off in -3.0f64..3.0) {
        let eig = sorted_eigenvalues(&diag, off);
        let count = eig.len().min(5);
        let ours = tridiagonal_eigenvalues(&diag, off, count).unwrap();
        for (a, b) in ours.iter().zip(&eig) {
            prop_assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn richardson_reaches_oscillator_levels(k in 0.5f64..2.0, j in 0u32..=2) {
        let r_max = 2.0 * (8.0 * (4.0 * 3.0 + 3.0 + 2.0 * f64::from(j)) / k).sqrt();
        let spec = oscillator_operator(k, j, r_max, 1200).unwrap();
        let levels = richardson_eigenvalues(&spec, 4).unwrap();
        prop_assert!(levels.warnings.is_empty(), "{:?}", levels.warnings);
        for (n, e) in levels.values.iter().enumerate() {
            let exact = k * (4.0 * n as f64 + 3.0 + 2.0 * f64::from(j));
            prop_assert!((e - exact).abs() < 1e-6 * exact, "n={} {} vs {}", n, e, exact);
        }
    }
}

#[test]
fn richardson_reaches_coulomb_levels() {
    for lambda in [0.0, 1.0, 2.5] {
        let spec = coulomb_operator(lambda, 400.0, 20000).unwrap();
        let levels = richardson_eigenvalues(&spec, 3).unwrap();
        for (n, eps) in levels.values.iter().enumerate() {
            let xi = coulomb_xi(*eps).unwrap();
            let exact = lambda + 1.0 + n as f64;
            assert!((xi - exact).abs() < 1e-6 * exact, "Λ={lambda} n={n}: {xi}");
        }
    }
}
