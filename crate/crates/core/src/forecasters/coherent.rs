use super::{
    accumulate, check_horizon, fit_score_specs, forecast_scores, require_populations, ForecastSurface, ModelConfig,
    ModelContext, ModelKind, MortalityModel,
};
use crate::error::Result;
use crate::hmd::SurfaceBundle;
use crate::linalg::Matrix;
use crate::mfpca::{fit_mfpca, MfpcaFit};
use crate::scalar::Scalar;
use crate::smoothing::ResidualField;
use crate::tsmodels::{ArimaSpec, ScoreDynamics};
use crate::ufpca::{fit_ufpca, FpcaFit};

/// Common trend plus population-specific deviations.
///
/// `common_fit` decomposes the average curve `g_t`; its mean is the total
/// mean `μ`. `deviation_fit` decomposes `f_t^(i) − g̃_t`, where `g̃_t` is the
/// truncated reconstruction of `g_t`; its per-population means are `η^(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentFit<T> {
    pub common_fit: FpcaFit<T>,
    pub deviation_fit: MfpcaFit<T>,
}

impl<T: Scalar> CoherentFit<T> {
    pub fn total_mean(&self) -> &[T] {
        &self.common_fit.mean_fn
    }

    pub fn deviation_mean(&self, population: usize) -> &[T] {
        self.deviation_fit.mean_fn(population)
    }

    /// `μ + Σ_k β_k φ_k + η^(i) + Σ_l γ_l ψ_l^(i)`.
    pub fn curve(&self, population: usize, common: &[T], deviation: &[T]) -> Vec<T> {
        let g = self.common_fit.curve_from_scores(common);
        let d = self.deviation_fit.curve_from_scores(population, deviation);
        g.iter().zip(&d).map(|(&a, &b)| a + b).collect()
    }
}

/// Common scores follow non-stationary ARIMA models; deviation scores
/// follow zero-mean stationary ARMA models so that the deviations revert to
/// `η^(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentModel<T> {
    pub fit: CoherentFit<T>,
    pub common_specs: Vec<ArimaSpec>,
    pub deviation_specs: Vec<ArimaSpec>,
    pub context: ModelContext<T>,
}

pub fn fit_coherent<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    residuals: Option<&[ResidualField<T>]>,
    config: &ModelConfig<T>,
) -> Result<CoherentModel<T>> {
    require_populations(bundle, 2, ModelKind::Coherent)?;
    let (n_years, n_ages) = (bundle.years().len(), bundle.ages().len());
    let weights = config.weights(n_years)?;
    let context = ModelContext::new(bundle, residuals, &weights, config.alpha)?;
    let curves = bundle.curves();
    let p = T::from_count(curves.len());

    let g = Matrix::from_fn(n_years, n_ages, |t, x| {
        curves.iter().map(|c| c[(t, x)]).sum::<T>() / p
    });
    let common_fit = fit_ufpca(&g, &weights, &config.rule, config.power)?;
    let g_tilde: Vec<Vec<T>> = (0..n_years)
        .map(|t| common_fit.reconstruct(t))
        .collect::<Result<_>>()?;
    let deviations: Vec<Matrix<T>> = curves
        .iter()
        .map(|c| Matrix::from_fn(n_years, n_ages, |t, x| c[(t, x)] - g_tilde[t][x]))
        .collect();
    let refs: Vec<&Matrix<T>> = deviations.iter().collect();
    let deviation_fit = fit_mfpca(&refs, &weights, &config.rule, config.power)?;

    let common_specs = fit_score_specs(&common_fit.scores, ScoreDynamics::Nonstationary)?;
    let deviation_specs = fit_score_specs(&deviation_fit.shared_scores, ScoreDynamics::StationaryZeroMean)?;
    Ok(CoherentModel {
        fit: CoherentFit {
            common_fit,
            deviation_fit,
        },
        common_specs,
        deviation_specs,
        context,
    })
}

impl<T: Scalar> MortalityModel<T> for CoherentModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Coherent
    }

    fn context(&self) -> &ModelContext<T> {
        &self.context
    }

    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>> {
        self.context.check_population(population)?;
        self.context.check_year(t)?;
        Ok(self.fit.curve(
            population,
            self.fit.common_fit.scores.row(t),
            self.fit.deviation_fit.shared_scores.row(t),
        ))
    }

    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>> {
        check_horizon(h)?;
        let common = &self.fit.common_fit;
        let dev = &self.fit.deviation_fit;
        let common_scores = forecast_scores(&self.common_specs, &common.scores, h)?;
        let dev_scores = forecast_scores(&self.deviation_specs, &dev.shared_scores, h)?;
        (0..dev.n_populations())
            .map(|i| {
                let base: Vec<T> = common.mean_fn.iter().zip(dev.mean_fn(i)).map(|(&a, &b)| a + b).collect();
                let mut mean = vec![base; h];
                let mut var = vec![vec![T::zero(); common.n_ages()]; h];
                accumulate(&mut mean, &mut var, &common_scores, &common.eigenfunctions);
                accumulate(&mut mean, &mut var, &dev_scores, &dev.multi_eigenfunctions[i]);
                self.context.surface(i, mean, var)
            })
            .collect()
    }
}
