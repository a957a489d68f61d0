use rayon::prelude::*;

use super::{
    accumulate, check_horizon, fit_score_specs, forecast_scores, ForecastSurface, ModelConfig, ModelContext, ModelKind,
    MortalityModel,
};
use crate::error::Result;
use crate::hmd::SurfaceBundle;
use crate::scalar::Scalar;
use crate::smoothing::ResidualField;
use crate::tsmodels::{ArimaSpec, ScoreDynamics};
use crate::ufpca::{fit_ufpca, FpcaFit, WeightScheme};

/// One univariate FPCA per population with non-stationary score dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentModel<T> {
    pub fits: Vec<FpcaFit<T>>,
    /// `specs[i][n]` drives score `n` of population `i`.
    pub specs: Vec<Vec<ArimaSpec>>,
    pub context: ModelContext<T>,
}

/// Unweighted unless `config.weighted_independent` is set and κ is given.
pub fn fit_independent<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    residuals: Option<&[ResidualField<T>]>,
    config: &ModelConfig<T>,
) -> Result<IndependentModel<T>> {
    let n_years = bundle.years().len();
    let weights = if config.weighted_independent {
        config.weights(n_years)?
    } else {
        WeightScheme::uniform(n_years)
    };
    let context = ModelContext::new(bundle, residuals, &weights, config.alpha)?;
    let fits = bundle
        .curves()
        .par_iter()
        .map(|c| fit_ufpca(c, &weights, &config.rule, config.power))
        .collect::<Result<Vec<_>>>()?;
    let specs = fits
        .iter()
        .map(|f| fit_score_specs(&f.scores, ScoreDynamics::Nonstationary))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndependentModel { fits, specs, context })
}

impl<T: Scalar> MortalityModel<T> for IndependentModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Independent
    }

    fn context(&self) -> &ModelContext<T> {
        &self.context
    }

    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>> {
        self.context.check_population(population)?;
        self.fits[population].reconstruct(t)
    }

    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>> {
        check_horizon(h)?;
        self.fits
            .iter()
            .zip(&self.specs)
            .enumerate()
            .map(|(i, (fit, specs))| {
                let scores = forecast_scores(specs, &fit.scores, h)?;
                let mut mean = vec![fit.mean_fn.clone(); h];
                let mut var = vec![vec![T::zero(); fit.n_ages()]; h];
                accumulate(&mut mean, &mut var, &scores, &fit.eigenfunctions);
                self.context.surface(i, mean, var)
            })
            .collect()
    }
}
