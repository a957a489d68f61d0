use mortfpca::evaluation::ComponentRule;
use mortfpca::forecasters::*;
use mortfpca::hmd::{MortalitySurface, SurfaceBundle, SurfaceKind};
use mortfpca::linalg::Matrix;
use mortfpca::scalar::dot;
use mortfpca::synthetic::{two_population, SyntheticConfig};
use mortfpca::tsmodels::{fit_auto, forecast, ScoreDynamics};
use mortfpca::ufpca::{fit_ufpca, WeightPower, WeightScheme};

fn japan_like(seed: u64) -> SurfaceBundle<f64> {
    two_population::<f64>(&SyntheticConfig {
        seed,
        ..Default::default()
    })
    .unwrap()
    .truth
}

fn diverging(seed: u64) -> SurfaceBundle<f64> {
    two_population::<f64>(&SyntheticConfig {
        seed,
        divergence: -0.8,
        gap_sd: 0.0,
        ..Default::default()
    })
    .unwrap()
    .truth
}

fn mean_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

fn renamed(s: &MortalitySurface<f64>, id: &str) -> MortalitySurface<f64> {
    MortalitySurface {
        population_id: id.into(),
        ..s.clone()
    }
}

#[test]
fn single_population_independent_is_ufpca_plus_arima() {
    let bundle = japan_like(3).select(&["SYN_male"]).unwrap();
    let cfg = ModelConfig::new(ModelKind::Independent);
    let model = fit_model(&bundle, None, &cfg).unwrap();
    let out = model.forecast(10).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].horizon_years, (1997..=2006).collect::<Vec<_>>());

    let c = &bundle.surfaces()[0].log_rates;
    let fit = fit_ufpca(c, &WeightScheme::uniform(50), &ComponentRule::default(), WeightPower::One).unwrap();
    let mut expect = vec![fit.mean_fn.clone(); 10];
    for n in 0..fit.n_components() {
        let series = fit.score_series(n);
        let spec = fit_auto(&series, ScoreDynamics::Nonstationary).unwrap();
        let f = forecast(&spec, &series, 10).unwrap();
        for (s, row) in expect.iter_mut().enumerate() {
            for (v, &phi) in row.iter_mut().zip(fit.eigenfunctions.row(n)) {
                *v += f.mean[s] * phi;
            }
        }
    }
    for s in 0..10 {
        for j in 0..101 {
            assert!((out[0].mean[(s, j)] - expect[s][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn independent_forecasts_of_diverging_populations_drift_apart() {
    let model = fit_model(&diverging(5), None, &ModelConfig::new(ModelKind::Independent)).unwrap();
    let f = model.forecast(50).unwrap();
    let gap = |h: usize| mean_abs_gap(f[0].mean_at(h), f[1].mean_at(h));
    assert!(gap(50) > gap(1), "gap(1) {} gap(50) {}", gap(1), gap(50));
}

#[test]
fn coherent_and_product_ratio_gaps_converge_to_mean_gaps() {
    for bundle in [japan_like(11), diverging(12)] {
        let coherent = fit_coherent(&bundle, None, &ModelConfig::new(ModelKind::Coherent).with_kappa(0.1)).unwrap();
        let f = coherent.forecast(500).unwrap();
        let eta0 = coherent.fit.deviation_mean(0);
        let eta1 = coherent.fit.deviation_mean(1);
        for j in 0..101 {
            let gap = f[0].mean[(499, j)] - f[1].mean[(499, j)];
            assert!((gap - (eta0[j] - eta1[j])).abs() < 1e-3, "coherent age {j}");
        }

        let pr = fit_product_ratio(&bundle, None, &ModelConfig::new(ModelKind::ProductRatio)).unwrap();
        let f = pr.forecast(500).unwrap();
        for j in 0..101 {
            let gap = f[0].mean[(499, j)] - f[1].mean[(499, j)];
            let mean_gap = pr.ratios[0].mean_fn[j] - pr.ratios[1].mean_fn[j];
            assert!((gap - mean_gap).abs() < 1e-3, "product-ratio age {j}");
        }
    }
}

#[test]
fn log_sex_ratio_is_bounded_for_coherent_models_only() {
    let bundle = diverging(21);
    let horizon = 400;
    let sup = |kind: ModelKind| {
        let cfg = ModelConfig::new(kind).with_kappa(0.1);
        let f = fit_model(&bundle, None, &cfg).unwrap().forecast(horizon).unwrap();
        let gap = |h: usize| mean_abs_gap(f[0].mean_at(h), f[1].mean_at(h));
        (gap(horizon / 2), gap(horizon))
    };
    for kind in [ModelKind::Coherent, ModelKind::ProductRatio] {
        let (mid, end) = sup(kind);
        assert!((end - mid).abs() < 1e-3, "{kind}: {mid} vs {end}");
    }
    let (mid, end) = sup(ModelKind::Independent);
    assert!(end > mid + 0.1, "independent: {mid} vs {end}");
}

#[test]
fn identical_populations_have_no_deviations() {
    let base = japan_like(4);
    let male = &base.surfaces()[0];
    let bundle = SurfaceBundle::new(vec![renamed(male, "a"), renamed(male, "b")]).unwrap();

    let cfg = ModelConfig::new(ModelKind::Coherent)
        .with_kappa(0.2)
        .with_rule(ComponentRule::full_rank());
    let coherent = fit_coherent(&bundle, None, &cfg).unwrap();
    for i in 0..2 {
        assert!(coherent.fit.deviation_mean(i).iter().all(|v| v.abs() < 1e-10));
    }
    let lead = coherent.fit.common_fit.eigenvalues[0];
    assert!(coherent.fit.deviation_fit.joint_eigenvalues.iter().all(|&v| v < 1e-12 * lead));
    let f = coherent.forecast(20).unwrap();
    assert!(f[0].mean.max_abs_diff(&f[1].mean) < 1e-10);

    let pr = fit_product_ratio(&bundle, None, &ModelConfig::new(ModelKind::ProductRatio)).unwrap();
    for r in &pr.ratios {
        assert_eq!(r.n_components(), 0);
        assert!(r.mean_fn.iter().all(|&v| v == 0.0));
    }
    let f = pr.forecast(20).unwrap();
    assert!(f[0].mean.max_abs_diff(&f[1].mean) < 1e-12);
    // with no ratio components the forecast is the product forecast
    let product = SurfaceBundle::new(vec![renamed(male, "p")]).unwrap();
    let alone = fit_model(&product, None, &ModelConfig::new(ModelKind::Independent)).unwrap();
    assert!(alone.forecast(20).unwrap()[0].mean.max_abs_diff(&f[0].mean) < 1e-10);
}

#[test]
fn product_and_ratios_reconstruct_the_log_rates() {
    let bundle = japan_like(6);
    let (product, ratios) = product_ratio_split(&bundle.curves());
    for (i, s) in bundle.surfaces().iter().enumerate() {
        for t in 0..50 {
            for j in 0..101 {
                let back = product[(t, j)] + ratios[i][(t, j)];
                assert!((back - s.log_rates[(t, j)]).abs() <= 1e-15 * s.log_rates[(t, j)].abs().max(1.0));
            }
        }
    }
}

#[test]
fn full_rank_models_reproduce_training_curves() {
    let pair = two_population::<f64>(&SyntheticConfig {
        n_years: 30,
        ..Default::default()
    })
    .unwrap();
    let bundle = pair.observed;
    for kind in ModelKind::ALL {
        let cfg = ModelConfig::new(kind).with_kappa(0.1).with_rule(ComponentRule::full_rank());
        let model = fit_model(&bundle, None, &cfg).unwrap();
        for (i, s) in bundle.surfaces().iter().enumerate() {
            for t in 0..30 {
                let fitted = model.fitted(i, t).unwrap();
                let err = fitted
                    .iter()
                    .zip(s.log_rates.row(t))
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err < 1e-6, "{kind} pop {i} year {t}: {err}");
            }
        }
        assert!(model.fitted(2, 0).is_err());
        assert!(model.fitted(0, 30).is_err());
    }
}

#[test]
fn tiny_kappa_matches_uniform_weights() {
    let bundle = japan_like(8);
    let uniform = fit_wmfpca(&bundle, None, &ModelConfig::new(ModelKind::Wmfpca)).unwrap();
    let tiny = fit_wmfpca(&bundle, None, &ModelConfig::new(ModelKind::Wmfpca).with_kappa(1e-6)).unwrap();
    let a = uniform.forecast(20).unwrap();
    let b = tiny.forecast(20).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(x.mean.max_abs_diff(&y.mean) < 1e-3);
    }
}

#[test]
fn rank_one_wmfpca_matches_single_factor_oracle() {
    let (t_len, j) = (40, 12);
    let mu: [Vec<f64>; 2] = [
        (0..j).map(|x| -6.0 + 0.3 * x as f64).collect(),
        (0..j).map(|x| -6.5 + 0.31 * x as f64).collect(),
    ];
    let v: [Vec<f64>; 2] = [
        (0..j).map(|x| 0.5 + 0.05 * x as f64).collect(),
        (0..j).map(|x| 0.4 + 0.02 * (x as f64).sqrt()).collect(),
    ];
    let mut a = 0.0;
    let factor: Vec<f64> = (0..t_len)
        .map(|t| {
            a += -0.3 + 0.2 * ((t * 7919 % 13) as f64 / 13.0 - 0.5);
            a
        })
        .collect();
    let surfaces = (0..2)
        .map(|i| {
            let m = Matrix::from_fn(t_len, j, |t, x| mu[i][x] + factor[t] * v[i][x]);
            MortalitySurface::new(
                format!("p{i}"),
                (0..j as u32).collect(),
                (2000..2000 + t_len as i32).collect(),
                m,
                SurfaceKind::Smoothed,
            )
            .unwrap()
        })
        .collect();
    let bundle = SurfaceBundle::new(surfaces).unwrap();
    let model = fit_wmfpca(&bundle, None, &ModelConfig::new(ModelKind::Wmfpca)).unwrap();
    assert_eq!(model.fit.n_components(), 1);
    let f = model.forecast(15).unwrap();

    // hand-built oracle: sample means, unit stacked loading, projected factor
    let norm = (dot(&v[0], &v[0]) + dot(&v[1], &v[1])).sqrt();
    let psi: Vec<Vec<f64>> = v.iter().map(|vi| vi.iter().map(|x| x / norm).collect()).collect();
    let curves = bundle.curves();
    let means: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| (0..j).map(|x| c.col(x).iter().sum::<f64>() / t_len as f64).collect())
        .collect();
    let mut rho: Vec<f64> = (0..t_len)
        .map(|t| {
            (0..2)
                .map(|i| (0..j).map(|x| (curves[i][(t, x)] - means[i][x]) * psi[i][x]).sum::<f64>())
                .sum()
        })
        .collect();
    let sign = dot(&rho, &model.fit.shared_scores.col(0)).signum();
    rho.iter_mut().for_each(|r| *r *= sign);
    let spec = fit_auto(&rho, ScoreDynamics::Nonstationary).unwrap();
    let rho_f = forecast(&spec, &rho, 15).unwrap();
    for i in 0..2 {
        for s in 0..15 {
            for x in 0..j {
                let oracle = means[i][x] + rho_f.mean[s] * sign * psi[i][x];
                assert!((f[i].mean[(s, x)] - oracle).abs() < 1e-6, "pop {i} step {s} age {x}");
            }
        }
    }
}

#[test]
fn coherent_deviation_scores_have_zero_weighted_mean() {
    let bundle = japan_like(9);
    let kappa = 0.15;
    let model = fit_coherent(&bundle, None, &ModelConfig::new(ModelKind::Coherent).with_kappa(kappa)).unwrap();
    let w = mortfpca::ufpca::geometric_weights(kappa, 50).unwrap();
    let scores = &model.fit.deviation_fit.shared_scores;
    assert!(scores.cols() > 0);
    for n in 0..scores.cols() {
        let m: f64 = scores.col(n).iter().zip(&w.weights).map(|(s, w)| s * w).sum();
        assert!(m.abs() < 1e-8, "component {n}: {m}");
    }
    assert!(model.deviation_specs.iter().all(|s| s.d == 0 && !s.include_drift));
}

#[test]
fn constant_surface_forecasts_the_constant() {
    let s = MortalitySurface::<f64>::new(
        "c",
        (0..=100).collect(),
        (1950..1970).collect(),
        Matrix::from_fn(20, 101, |_, _| -3.0f64),
        SurfaceKind::Smoothed,
    )
    .unwrap();
    let bundle = SurfaceBundle::new(vec![s]).unwrap();
    let f = fit_model(&bundle, None, &ModelConfig::new(ModelKind::Independent)).unwrap().forecast(1).unwrap();
    assert!(f[0].mean.as_slice().iter().all(|v: &f64| (v + 3.0).abs() < 1e-6));
    assert!(f[0].variance.as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn intervals_widen_and_contain_the_mean() {
    let pair = two_population::<f64>(&SyntheticConfig::default()).unwrap();
    let fields: Vec<_> = pair
        .observed
        .surfaces()
        .iter()
        .zip(pair.truth.surfaces())
        .map(|(o, t)| {
            mortfpca::smoothing::ResidualField::from_sigma(Matrix::from_fn(50, 101, |r, c| {
                (o.log_rates[(r, c)] - t.log_rates[(r, c)]).abs()
            }))
        })
        .collect();
    for kind in ModelKind::ALL {
        let cfg = ModelConfig::new(kind).with_kappa(0.2);
        let model = fit_model(&pair.truth, Some(&fields), &cfg).unwrap();
        for f in model.forecast(30).unwrap() {
            for s in 0..30 {
                for j in 0..101 {
                    assert!(f.variance[(s, j)] > 0.0);
                    assert!(f.lower[(s, j)] <= f.mean[(s, j)] && f.mean[(s, j)] <= f.upper[(s, j)]);
                }
            }
            let width = |s: usize| (0..101).map(|j| f.upper[(s, j)] - f.lower[(s, j)]).sum::<f64>();
            assert!(width(29) > width(0), "{kind}");
        }
    }
}

#[test]
fn configuration_errors() {
    let bundle = japan_like(1);
    let one = bundle.select(&["SYN_male"]).unwrap();
    assert!(fit_model(&one, None, &ModelConfig::new(ModelKind::Coherent)).is_err());
    assert!(fit_model(&one, None, &ModelConfig::new(ModelKind::ProductRatio)).is_err());
    let mut cfg = ModelConfig::new(ModelKind::Wmfpca).with_kappa(1.5);
    assert!(fit_model(&bundle, None, &cfg).is_err());
    cfg.kappa = None;
    cfg.alpha = 0.0;
    assert!(matches!(fit_model(&bundle, None, &cfg), Err(mortfpca::error::Error::AlphaOutOfRange(_))));
    let model = fit_model(&bundle, None, &ModelConfig::new(ModelKind::Wmfpca)).unwrap();
    assert!(model.forecast(0).is_err());
    assert_eq!("product_ratio".parse::<ModelKind>().unwrap(), ModelKind::ProductRatio);
    assert!("lee_carter".parse::<ModelKind>().is_err());
}
