//! Component-count selection, rolling-window forecast evaluation and κ
//! tuning.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forecasters::{fit_model, ModelConfig, ModelKind, MortalityModel};
use crate::hmd::SurfaceBundle;
use crate::scalar::Scalar;
use crate::tsmodels::MIN_SERIES_LEN;

pub const DEFAULT_WINDOWS: usize = 10;

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentRule {
    /// Minimum cumulative share of variance, in (0, 1].
    pub threshold: f64,
    /// Fixed count; wins over the threshold. Clamped to the number of
    /// available components.
    pub override_n: Option<usize>,
}

impl Default for ComponentRule {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            override_n: None,
        }
    }
}

impl ComponentRule {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold,
            override_n: None,
        }
    }

    pub fn fixed(n: usize) -> Self {
        Self {
            threshold: 1.0,
            override_n: Some(n),
        }
    }

    /// Every numerically non-zero component.
    pub fn full_rank() -> Self {
        Self::fixed(usize::MAX)
    }

    pub fn select<T: Scalar>(&self, eigenvalues: &[T]) -> usize {
        match self.override_n {
            Some(n) => n.min(eigenvalues.len()),
            None => select_ncomp(eigenvalues, self.threshold),
        }
    }
}

/// Smallest N ≥ 1 whose leading eigenvalues carry at least `threshold` of
/// the total. Returns 0 when the total is zero.
pub fn select_ncomp<T: Scalar>(eigenvalues: &[T], threshold: f64) -> usize {
    let vals: Vec<f64> = eigenvalues.iter().map(|v| v.as_f64().max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if !(total > 0.0) {
        return 0;
    }
    let mut acc = 0.0;
    for (n, v) in vals.iter().enumerate() {
        acc += v;
        // relative slack so that exact boundary shares count as reached
        if acc / total >= threshold - 1e-12 {
            return n + 1;
        }
    }
    vals.len()
}

/// Root mean square of a set of errors.
pub fn rmse(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub country: String,
    pub model: ModelKind,
    pub h: usize,
    pub population_ids: Vec<String>,
    /// One entry per population, same order as `population_ids`.
    pub rmse: Vec<f64>,
    pub avg_rmse: f64,
    pub windows: usize,
    pub kappa: Option<f64>,
}

/// Index of the last training year of window `w`. The forecast targets of
/// the windows are the last `windows` years of the sample.
pub fn training_end(n_years: usize, h: usize, windows: usize, w: usize) -> usize {
    n_years - 1 - h - (windows - 1) + w
}

fn check_span(n_years: usize, h: usize, windows: usize) -> Result<()> {
    if h == 0 || windows == 0 {
        return Err(Error::InvalidConfig {
            module: "evaluation",
            reason: "horizon and window count must be at least 1".into(),
        });
    }
    let need = MIN_SERIES_LEN + h + windows - 1;
    if n_years < need {
        return Err(Error::InsufficientSpan(format!(
            "{n_years} years cannot hold {windows} windows at horizon {h} with at least {MIN_SERIES_LEN} training years"
        )));
    }
    Ok(())
}

/// Rolling-window RMSE with a caller-supplied forecaster.
///
/// For window `w` the forecaster receives the training-end index `e_w`
/// and returns, per population, the forecast curve for year index
/// `e_w + h`. Squared errors against `actual` are pooled over windows and
/// ages, so the divisor is `windows × J`.
pub fn rolling_rmse_with<T, F>(
    actual: &SurfaceBundle<T>,
    h: usize,
    windows: usize,
    forecaster: F,
) -> Result<(Vec<f64>, f64)>
where
    T: Scalar,
    F: Fn(usize) -> Result<Vec<Vec<T>>> + Sync,
{
    let n_years = actual.years().len();
    check_span(n_years, h, windows)?;
    let n_pop = actual.len();
    let per_window = (0..windows)
        .into_par_iter()
        .map(|w| {
            let end = training_end(n_years, h, windows, w);
            let curves = forecaster(end)?;
            if curves.len() != n_pop {
                return Err(Error::ShapeMismatch {
                    module: "evaluation",
                    reason: format!("{} forecasts for {n_pop} populations", curves.len()),
                });
            }
            curves
                .iter()
                .zip(actual.surfaces())
                .map(|(c, s)| {
                    let truth = s.log_rates.row(end + h);
                    if c.len() != truth.len() {
                        return Err(Error::ShapeMismatch {
                            module: "evaluation",
                            reason: "forecast curve length differs from the age grid".into(),
                        });
                    }
                    Ok(c.iter().zip(truth).map(|(&a, &b)| (a - b).as_f64().powi(2)).sum::<f64>())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = (windows * actual.ages().len()) as f64;
    let per_pop: Vec<f64> = (0..n_pop)
        .map(|i| (per_window.iter().map(|w| w[i]).sum::<f64>() / cells).sqrt())
        .collect();
    let avg = per_pop.iter().sum::<f64>() / n_pop as f64;
    Ok((per_pop, avg))
}

/// Rolling-window RMSE of a model fitted on expanding windows of `fit_data`
/// and scored against `actual` (both aligned).
pub fn rolling_rmse<T: Scalar>(
    country: &str,
    fit_data: &SurfaceBundle<T>,
    actual: &SurfaceBundle<T>,
    config: &ModelConfig<T>,
    h: usize,
    windows: usize,
) -> Result<EvalReport> {
    if fit_data.years() != actual.years() || fit_data.ages() != actual.ages() || fit_data.len() != actual.len() {
        return Err(Error::ShapeMismatch {
            module: "evaluation",
            reason: "fitting and scoring surfaces are not aligned".into(),
        });
    }
    config.validate()?;
    let (rmse, avg_rmse) = rolling_rmse_with(actual, h, windows, |end| {
        let train = fit_data.slice_years(0..end + 1)?;
        let model = fit_model(&train, None, config)?;
        let f = model.forecast(h)?;
        Ok(f.into_iter().map(|s| s.mean_at(h).to_vec()).collect())
    })?;
    Ok(EvalReport {
        country: country.to_string(),
        model: config.kind,
        h,
        population_ids: actual.surfaces().iter().map(|s| s.population_id.clone()).collect(),
        rmse,
        avg_rmse,
        windows,
        kappa: config.kappa.map(Scalar::as_f64),
    })
}

/// `0.05, 0.10, …, 0.95`.
pub fn default_kappa_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaSearch {
    pub best: f64,
    /// `(κ, average rolling RMSE)` for every grid point, in grid order.
    pub objective: Vec<(f64, f64)>,
}

/// Objectives closer than this (relative to `1 + min`) count as tied.
pub const KAPPA_TIE_TOL: f64 = 1e-10;

/// Grid value of κ minimising the average rolling RMSE; ties go to the
/// smaller κ.
pub fn tune_kappa<T: Scalar>(
    fit_data: &SurfaceBundle<T>,
    actual: &SurfaceBundle<T>,
    config: &ModelConfig<T>,
    h: usize,
    windows: usize,
    grid: &[f64],
) -> Result<KappaSearch> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig {
            module: "evaluation",
            reason: "empty kappa grid".into(),
        });
    }
    if let Some(&k) = grid.iter().find(|&&k| !(k > 0.0 && k < 1.0)) {
        return Err(Error::KappaOutOfRange(k));
    }
    let objective = grid
        .par_iter()
        .map(|&k| {
            let cfg = ModelConfig {
                kappa: Some(T::lit(k)),
                ..config.clone()
            };
            rolling_rmse("", fit_data, actual, &cfg, h, windows).map(|r| (k, r.avg_rmse))
        })
        .collect::<Result<Vec<_>>>()?;
    let min = objective.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let best = objective
        .iter()
        .filter(|o| o.1 <= min + KAPPA_TIE_TOL * (1.0 + min))
        .map(|o| o.0)
        .fold(f64::INFINITY, f64::min);
    Ok(KappaSearch { best, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ncomp_examples() {
        assert_eq!(select_ncomp(&[4.0, 1.0, 0.0, 0.0], 0.8), 1);
        assert_eq!(select_ncomp(&[0.972, 0.023, 0.002, 0.003], 0.9), 1);
        assert_eq!(select_ncomp(&[1.0, 1.0, 1.0, 1.0], 0.9), 4);
        assert_eq!(select_ncomp(&[0.0, 0.0], 0.9), 0);
        assert_eq!(select_ncomp::<f64>(&[], 0.9), 0);
        assert_eq!(ComponentRule::fixed(3).select(&[5.0, 1.0]), 2);
        assert_eq!(ComponentRule::with_threshold(1.0).select(&[5.0, 1.0, 1e-3]), 3);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[]), 0.0);
        assert_eq!(rmse(&[0.0, 0.0]), 0.0);
        assert!((rmse(&[0.3, -0.3, 0.3]) - 0.3).abs() < 1e-15);
        assert!((rmse(&[3.0, 4.0]) - (12.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn window_schedule_tiles_the_last_years() {
        // 1947..=1996, h = 20, ten windows: training ends 1967..=1976
        let ends: Vec<usize> = (0..10).map(|w| training_end(50, 20, 10, w)).collect();
        assert_eq!(ends.first().map(|e| 1947 + *e as i32), Some(1967));
        assert_eq!(ends.last().map(|e| 1947 + *e as i32 + 20), Some(1996));
        assert!(check_span(50, 20, 10).is_ok());
        assert!(matches!(check_span(30, 20, 10), Err(Error::InsufficientSpan(_))));
    }
}
