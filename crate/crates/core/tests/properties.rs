use proptest::prelude::*;

use mortfpca::demographics::{life_expectancy, sex_ratio};
use mortfpca::evaluation::{rmse, select_ncomp, training_end, ComponentRule};
use mortfpca::linalg::{normalize_sign, Matrix};
use mortfpca::smoothing::pava_increasing;
use mortfpca::ufpca::{fit_ufpca, geometric_weights, WeightPower, WeightScheme};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometric_weights_are_normalised_and_increasing(kappa in 0.001f64..0.999, n in 1usize..120) {
        let w = geometric_weights(kappa, n).unwrap();
        let sum: f64 = w.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(w.weights.windows(2).all(|p| p[1] >= p[0]));
        prop_assert!(w.weights.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn rmse_scales_and_grows(errors in prop::collection::vec(-5.0f64..5.0, 1..50), c in 0.0f64..10.0) {
        let base = rmse(&errors);
        let scaled: Vec<f64> = errors.iter().map(|e| c * e).collect();
        prop_assert!((rmse(&scaled) - c * base).abs() <= 1e-12 * (1.0 + c * base));
        let bigger: Vec<f64> = errors.iter().map(|e| e.abs() + 0.1).collect();
        prop_assert!(rmse(&bigger) > base);
    }

    #[test]
    fn sign_normalisation_is_idempotent_and_sign_invariant(v in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        let mut a = v.clone();
        normalize_sign(&mut a);
        let mut b: Vec<f64> = v.iter().map(|x| -x).collect();
        normalize_sign(&mut b);
        prop_assert_eq!(&a, &b);
        let mut c = a.clone();
        normalize_sign(&mut c);
        prop_assert_eq!(a, c);
    }

    #[test]
    fn pava_is_monotone_and_mean_preserving(y in prop::collection::vec(-10.0f64..10.0, 1..60)) {
        let fit = pava_increasing(&y);
        prop_assert_eq!(fit.len(), y.len());
        prop_assert!(fit.windows(2).all(|p| p[1] >= p[0] - 1e-12));
        let (s, t): (f64, f64) = (y.iter().sum(), fit.iter().sum());
        prop_assert!((s - t).abs() < 1e-9);
    }

    #[test]
    fn ncomp_meets_the_threshold(mut eig in prop::collection::vec(0.001f64..10.0, 1..15), p in 0.05f64..1.0) {
        eig.sort_by(|a, b| b.total_cmp(a));
        let n = select_ncomp(&eig, p);
        let total: f64 = eig.iter().sum();
        prop_assert!(n >= 1 && n <= eig.len());
        prop_assert!(eig[..n].iter().sum::<f64>() >= p * total - 1e-12);
        if n > 1 {
            prop_assert!(eig[..n - 1].iter().sum::<f64>() < p * total);
        }
    }

    #[test]
    fn windows_end_on_the_last_year(n in 30usize..80, h in 1usize..10, windows in 1usize..10) {
        prop_assert_eq!(training_end(n, h, windows, windows - 1) + h, n - 1);
        for w in 1..windows {
            prop_assert_eq!(training_end(n, h, windows, w), training_end(n, h, windows, w - 1) + 1);
        }
    }

    #[test]
    fn fpca_basis_is_orthonormal_and_reconstructs(c in matrix(8, 6), kappa in prop::option::of(0.05f64..0.9)) {
        let w = match kappa {
            Some(k) => geometric_weights(k, 8).unwrap(),
            None => WeightScheme::uniform(8),
        };
        let fit = fit_ufpca(&c, &w, &ComponentRule::full_rank(), WeightPower::One).unwrap();
        let g = fit.eigenfunctions.matmul(&fit.eigenfunctions.transpose());
        prop_assert!(g.max_abs_diff(&Matrix::identity(fit.n_components())) < 1e-9);
        for t in 0..8 {
            let r = fit.reconstruct(t).unwrap();
            for (a, b) in r.iter().zip(c.row(t)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sex_ratio_is_exp_of_the_log_gap(a in matrix(3, 4), b in matrix(3, 4)) {
        let r = sex_ratio(&a, &b).unwrap();
        for (i, v) in r.as_slice().iter().enumerate() {
            let want = (a.as_slice()[i] - b.as_slice()[i]).exp();
            prop_assert!((v - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn uniform_increase_lowers_life_expectancy(level in -9.0f64..-1.0, slope in 0.0f64..0.08, bump in 0.01f64..1.0) {
        let row: Vec<f64> = (0..=100).map(|x| level + slope * x as f64).collect();
        let raised: Vec<f64> = row.iter().map(|v| v + bump).collect();
        let e = life_expectancy(&row).unwrap().e0();
        prop_assert!(e > 0.0);
        prop_assert!(life_expectancy(&raised).unwrap().e0() < e);
    }
}
