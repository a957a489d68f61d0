use rayon::prelude::*;

use super::{
    accumulate, check_horizon, fit_score_specs, forecast_scores, require_populations, ForecastSurface, ModelConfig,
    ModelContext, ModelKind, MortalityModel,
};
use crate::error::Result;
use crate::hmd::SurfaceBundle;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::smoothing::ResidualField;
use crate::tsmodels::{ArimaSpec, ScoreDynamics};
use crate::ufpca::{fit_ufpca, FpcaFit, WeightScheme};

/// Log-product `l_t = mean_i f_t^(i)` and log-ratios `r_t^(i) = f_t^(i) − l_t`,
/// each with its own unweighted FPCA.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRatioModel<T> {
    pub product: FpcaFit<T>,
    pub ratios: Vec<FpcaFit<T>>,
    pub product_specs: Vec<ArimaSpec>,
    pub ratio_specs: Vec<Vec<ArimaSpec>>,
    pub context: ModelContext<T>,
}

/// Log-product and log-ratio surfaces of aligned curve sets.
pub fn product_ratio_split<T: Scalar>(curves: &[&Matrix<T>]) -> (Matrix<T>, Vec<Matrix<T>>) {
    let (n_years, n_ages) = curves[0].shape();
    let p = T::from_count(curves.len());
    let product = Matrix::from_fn(n_years, n_ages, |t, x| {
        curves.iter().map(|c| c[(t, x)]).sum::<T>() / p
    });
    let ratios = curves
        .iter()
        .map(|c| Matrix::from_fn(n_years, n_ages, |t, x| c[(t, x)] - product[(t, x)]))
        .collect();
    (product, ratios)
}

pub fn fit_product_ratio<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    residuals: Option<&[ResidualField<T>]>,
    config: &ModelConfig<T>,
) -> Result<ProductRatioModel<T>> {
    require_populations(bundle, 2, ModelKind::ProductRatio)?;
    let weights = WeightScheme::uniform(bundle.years().len());
    let context = ModelContext::new(bundle, residuals, &weights, config.alpha)?;
    let (product_curves, ratio_curves) = product_ratio_split(&bundle.curves());
    let product = fit_ufpca(&product_curves, &weights, &config.rule, config.power)?;
    let ratios = ratio_curves
        .par_iter()
        .map(|r| fit_ufpca(r, &weights, &config.rule, config.power))
        .collect::<Result<Vec<_>>>()?;
    let product_specs = fit_score_specs(&product.scores, ScoreDynamics::Nonstationary)?;
    let ratio_specs = ratios
        .iter()
        .map(|f| fit_score_specs(&f.scores, ScoreDynamics::StationaryZeroMean))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductRatioModel {
        product,
        ratios,
        product_specs,
        ratio_specs,
        context,
    })
}

impl<T: Scalar> MortalityModel<T> for ProductRatioModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::ProductRatio
    }

    fn context(&self) -> &ModelContext<T> {
        &self.context
    }

    fn fitted(&self, population: usize, t: usize) -> Result<Vec<T>> {
        self.context.check_population(population)?;
        let l = self.product.reconstruct(t)?;
        let r = self.ratios[population].reconstruct(t)?;
        Ok(l.iter().zip(&r).map(|(&a, &b)| a + b).collect())
    }

    fn forecast(&self, h: usize) -> Result<Vec<ForecastSurface<T>>> {
        check_horizon(h)?;
        let product_scores = forecast_scores(&self.product_specs, &self.product.scores, h)?;
        self.ratios
            .iter()
            .zip(&self.ratio_specs)
            .enumerate()
            .map(|(i, (ratio, specs))| {
                let ratio_scores = forecast_scores(specs, &ratio.scores, h)?;
                let base: Vec<T> = self.product.mean_fn.iter().zip(&ratio.mean_fn).map(|(&a, &b)| a + b).collect();
                let mut mean = vec![base; h];
                let mut var = vec![vec![T::zero(); ratio.n_ages()]; h];
                accumulate(&mut mean, &mut var, &product_scores, &self.product.eigenfunctions);
                accumulate(&mut mean, &mut var, &ratio_scores, &ratio.eigenfunctions);
                self.context.surface(i, mean, var)
            })
            .collect()
    }
}
