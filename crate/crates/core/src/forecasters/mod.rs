//! End-to-end mortality forecasters: independent FPCA, weighted MFPCA,
//! coherent weighted MFPCA and Product-Ratio.

mod coherent;
mod independent;
mod interval;
mod product_ratio;
mod wmfpca;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use coherent::{fit_coherent, CoherentFit, CoherentModel};
pub use independent::{fit_independent, IndependentModel};
pub use interval::{predict_interval, z_quantile, ForecastSurface};
pub use product_ratio::{fit_product_ratio, product_ratio_split, ProductRatioModel};
pub use wmfpca::{fit_wmfpca, WmfpcaModel};

use crate::error::{Error, Result};
use crate::evaluation::ComponentRule;
use crate::hmd::SurfaceBundle;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::smoothing::ResidualField;
use crate::tsmodels::{fit_auto, forecast, ArimaSpec, ScoreDynamics, ScoreForecast};
use crate::ufpca::{geometric_weights, WeightPower, WeightScheme};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Independent,
    Wmfpca,
    Coherent,
    ProductRatio,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Independent,
        ModelKind::Wmfpca,
        ModelKind::Coherent,
        ModelKind::ProductRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Independent => "independent",
            ModelKind::Wmfpca => "wmfpca",
            ModelKind::Coherent => "coherent",
            ModelKind::ProductRatio => "product_ratio",
        }
    }

    /// Whether the model uses geometric weights, so that κ matters.
    pub fn is_weighted(self) -> bool {
        matches!(self, ModelKind::Wmfpca | ModelKind::Coherent)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig {
                module: "forecasters",
                reason: format!("unknown model {s:?}"),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<T> {
    pub kind: ModelKind,
    /// Geometric weight parameter. `None` gives uniform weights.
    pub kappa: Option<T>,
    pub rule: ComponentRule,
    pub power: WeightPower,
    pub alpha: f64,
    /// Use the κ weights in the independent model too.
    pub weighted_independent: bool,
}

impl<T: Scalar> ModelConfig<T> {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            kappa: None,
            rule: ComponentRule::default(),
            power: WeightPower::One,
            alpha: DEFAULT_ALPHA,
            weighted_independent: false,
        }
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_rule(mut self, rule: ComponentRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if !(self.rule.threshold > 0.0 && self.rule.threshold <= 1.0) {
            return Err(Error::InvalidConfig {
                module: "evaluation",
                reason: format!("variance threshold {} outside (0, 1]", self.rule.threshold),
            });
        }
        if let Some(k) = self.kappa {
            if !(k > T::zero() && k < T::one()) {
                return Err(Error::KappaOutOfRange(k.as_f64()));
            }
        }
        Ok(())
    }

    /// Weights for `n_years` under `kappa`, or uniform weights.
    pub fn weights(&self, n_years: usize) -> Result<WeightScheme<T>> {
        match self.kappa {
            Some(k) => geometric_weights(k, n_years),
            None => Ok(WeightScheme::uniform(n_years)),
        }
    }
}

/// Bookkeeping shared by every fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContext<T> {
    pub population_ids: Vec<String>,
    pub ages: Vec<u32>,
    pub years: Vec<i32>,
    /// Per population and age, the horizon-free part of the forecast
    /// variance: mean-estimation variance plus average observational variance.
    pub base_variance: Vec<Vec<T>>,
    pub alpha: f64,
}

impl<T: Scalar> ModelContext<T> {
    fn new(
        bundle: &SurfaceBundle<T>,
        residuals: Option<&[ResidualField<T>]>,
        weights: &WeightScheme<T>,
        alpha: f64,
    ) -> Result<Self> {
        let n_ages = bundle.ages().len();
        let base_variance = match residuals {
            None => vec![vec![T::zero(); n_ages]; bundle.len()],
            Some(fields) => {
                if fields.len() != bundle.len() {
                    return Err(Error::ShapeMismatch {
                        module: "forecasters",
                        reason: format!("{} residual fields for {} populations", fields.len(), bundle.len()),
                    });
                }
                fields
                    .iter()
                    .map(|f| {
                        if f.sigma.shape() != (weights.len(), n_ages) {
                            return Err(Error::ShapeMismatch {
                                module: "forecasters",
                                reason: "residual field does not match the surfaces".into(),
                            });
                        }
                        let tau = mean_variance(&weights.weights, &f.sigma);
                        Ok(tau.iter().zip(f.sigma_avg_sq()).map(|(&a, b)| a + b).collect())
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self {
            population_ids: bundle.surfaces().iter().map(|s| s.population_id.clone()).collect(),
            ages: bundle.ages().to_vec(),
            years: bundle.years().to_vec(),
            base_variance,
            alpha,
        })
    }

    pub fn n_populations(&self) -> usize {
        self.population_ids.len()
    }

    pub fn last_year(&self) -> i32 {
        *self.years.last().expect("non-empty year range")
    }

    fn check_population(&self, population: usize) -> Result<()> {
        if population >= self.n_populations() {
            return Err(Error::IndexOutOfRange {
                module: "forecasters",
                index: population,
                len: self.n_populations(),
            });
        }
        Ok(())
    }

    fn check_year(&self, t: usize) -> Result<()> {
        if t >= self.years.len() {
            return Err(Error::IndexOutOfRange {
                module: "forecasters",
                index: t,
                len: self.years.len(),
            });
        }
        Ok(())
    }

    /// Assembles the interval surface for one population from per-step
    /// means and the horizon-dependent part of the variance.
    fn surface(&self, population: usize, mean: Vec<Vec<T>>, score_variance: Vec<Vec<T>>) -> Result<ForecastSurface<T>> {
        let h = mean.len();
        let base = &self.base_variance[population];
        let mean = Matrix::from_rows(&mean);
        let variance = Matrix::from_fn(h, self.ages.len(), |s, j| score_variance[s][j] + base[j]);
        let years = (1..=h as i32).map(|s| self.last_year() + s).collect();
        predict_interval(
            &self.population_ids[population],
            &self.ages,
            years,
            mean,
            variance,
            self.alpha,
        )
    }
}

/// `τ²(x) = Σ_t w_t² σ_t(x)²` with weights summing to one.
pub fn mean_variance<T: Scalar>(weights: &[T], sigma: &Matrix<T>) -> Vec<T> {
    let mut out = vec![T::zero(); sigma.cols()];
    for (r, &w) in sigma.iter_rows().zip(weights) {
        for (o, &s) in out.iter_mut().zip(r) {
            *o += w * w * s * s;
        }
    }
    out
}

/// Per-column ARIMA specs for a score matrix.
pub(crate) fn fit_score_specs<T: Scalar>(scores: &Matrix<T>, mode: ScoreDynamics) -> Result<Vec<ArimaSpec>> {
    (0..scores.cols())
        .into_par_iter()
        .map(|n| fit_auto(&scores.col(n), mode))
        .collect()
}

pub(crate) fn forecast_scores<T: Scalar>(
    specs: &[ArimaSpec],
    scores: &Matrix<T>,
    h: usize,
) -> Result<Vec<ScoreForecast<T>>> {
    specs
        .iter()
        .enumerate()
        .map(|(n, spec)| forecast(spec, &scores.col(n), h))
        .collect()
}

/// Adds `Σ_n scores_n[s] · basis_n(x)` to `mean` and `Σ_n var_n[s] · basis_n(x)²`
/// to `var` for every step `s`.
pub(crate) fn accumulate<T: Scalar>(
    mean: &mut [Vec<T>],
    var: &mut [Vec<T>],
    forecasts: &[ScoreForecast<T>],
    basis: &Matrix<T>,
) {
    for (n, f) in forecasts.iter().enumerate() {
        let phi = basis.row(n);
        for (s, (m, v)) in mean.iter_mut().zip(var.iter_mut()).enumerate() {
            let (b, nu) = (f.mean[s], f.variance[s]);
            for ((mj, vj), &p) in m.iter_mut().zip(v.iter_mut()).zip(phi) {
                *mj += b * p;
                *vj += nu * p * p;
            }
        }
    }
}

fn require_populations<T: Scalar>(bundle: &SurfaceBundle<T>, min: usize, model: ModelKind) -> Result<()> {
    if bundle.len() < min {
        return Err(Error::InvalidConfig {
            module: "forecasters",
            reason: format!("{model} needs at least {min} populations, got {}", bundle.len()),
        });
    }
    Ok(())
}

pub trait MortalityModel<T: Scalar> {
    fn kind(&self) -> ModelKind;

    fn context(&self) -> &ModelContext<T>;

    /// In-sample curve of `population` at year index `t`.
    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>>;

    /// Forecasts for years `last + 1 ..= last + h`, one surface per population.
    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel<T> {
    Independent(IndependentModel<T>),
    Wmfpca(WmfpcaModel<T>),
    Coherent(CoherentModel<T>),
    ProductRatio(ProductRatioModel<T>),
}

impl<T: Scalar> FittedModel<T> {
    fn inner(&self) -> &dyn MortalityModel<T> {
        match self {
            FittedModel::Independent(m) => m,
            FittedModel::Wmfpca(m) => m,
            FittedModel::Coherent(m) => m,
            FittedModel::ProductRatio(m) => m,
        }
    }
}

impl<T: Scalar> MortalityModel<T> for FittedModel<T> {
    fn kind(&self) -> ModelKind {
        self.inner().kind()
    }

    fn context(&self) -> &ModelContext<T> {
        self.inner().context()
    }

    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>> {
        self.inner().fitted(population, t)
    }

    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>> {
        self.inner().forecast(h)
    }
}

/// Fits the model named in `config` to a bundle of smoothed surfaces.
/// `residuals`, one field per population, feed the horizon-free variance
/// terms; without them those terms are zero.
pub fn fit_model<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    residuals: Option<&[ResidualField<T>]>,
    config: &ModelConfig<T>,
) -> Result<FittedModel<T>> {
    config.validate()?;
    bundle.ensure_complete("forecasters")?;
    Ok(match config.kind {
        ModelKind::Independent => FittedModel::Independent(fit_independent(bundle, residuals, config)?),
        ModelKind::Wmfpca => FittedModel::Wmfpca(fit_wmfpca(bundle, residuals, config)?),
        ModelKind::Coherent => FittedModel::Coherent(fit_coherent(bundle, residuals, config)?),
        ModelKind::ProductRatio => FittedModel::ProductRatio(fit_product_ratio(bundle, residuals, config)?),
    })
}

fn check_horizon(h: usize) -> Result<()> {
    if h == 0 {
        return Err(Error::InvalidConfig {
            module: "forecasters",
            reason: "horizon must be at least 1".into(),
        });
    }
    Ok(())
}
