use super::{
    accumulate, check_horizon, fit_score_specs, forecast_scores, ForecastSurface, ModelConfig, ModelContext, ModelKind,
    MortalityModel,
};
use crate::error::Result;
use crate::hmd::SurfaceBundle;
use crate::mfpca::{fit_mfpca, MfpcaFit};
use crate::scalar::Scalar;
use crate::smoothing::ResidualField;
use crate::tsmodels::{ArimaSpec, ScoreDynamics};

/// Weighted MFPCA with non-stationary dynamics on the shared scores.
#[derive(Debug, Clone, PartialEq)]
pub struct WmfpcaModel<T> {
    pub fit: MfpcaFit<T>,
    pub specs: Vec<ArimaSpec>,
    pub context: ModelContext<T>,
}

pub fn fit_wmfpca<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    residuals: Option<&[ResidualField<T>]>,
    config: &ModelConfig<T>,
) -> Result<WmfpcaModel<T>> {
    let weights = config.weights(bundle.years().len())?;
    let context = ModelContext::new(bundle, residuals, &weights, config.alpha)?;
    let fit = fit_mfpca(&bundle.curves(), &weights, &config.rule, config.power)?;
    let specs = fit_score_specs(&fit.shared_scores, ScoreDynamics::Nonstationary)?;
    Ok(WmfpcaModel { fit, specs, context })
}

impl<T: Scalar> MortalityModel<T> for WmfpcaModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Wmfpca
    }

    fn context(&self) -> &ModelContext<T> {
        &self.context
    }

    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>> {
        self.context.check_population(population)?;
        self.fit.reconstruct(population, t)
    }

    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>> {
        check_horizon(h)?;
        let scores = forecast_scores(&self.specs, &self.fit.shared_scores, h)?;
        (0..self.fit.n_populations())
            .map(|i| {
                let mu = self.fit.mean_fn(i);
                let mut mean = vec![mu.to_vec(); h];
                let mut var = vec![vec![T::zero(); mu.len()]; h];
                accumulate(&mut mean, &mut var, &scores, &self.fit.multi_eigenfunctions[i]);
                self.context.surface(i, mean, var)
            })
            .collect()
    }
}
