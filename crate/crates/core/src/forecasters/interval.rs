use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Forecast of one population over consecutive future years.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSurface<T> {
    pub population_id: String,
    pub ages: Vec<u32>,
    pub horizon_years: Vec<i32>,
    /// h × J, log scale.
    pub mean: Matrix<T>,
    pub variance: Matrix<T>,
    pub lower: Matrix<T>,
    pub upper: Matrix<T>,
    pub alpha: f64,
}

impl<T: Scalar> ForecastSurface<T> {
    pub fn horizon(&self) -> usize {
        self.horizon_years.len()
    }

    /// Mean curve `h` steps ahead, `h ≥ 1`.
    pub fn mean_at(&self, h: usize) -> &[T] {
        self.mean.row(h - 1)
    }
}

/// Two-sided standard normal quantile `z` with `P(|Z| ≤ z) = 1 − α`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(1.0 - alpha / 2.0))
}

/// Wraps forecast means and total variances into `mean ± z √variance`.
pub fn predict_interval<T: Scalar>(
    population_id: &str,
    ages: &[u32],
    horizon_years: Vec<i32>,
    mean: Matrix<T>,
    variance: Matrix<T>,
    alpha: f64,
) -> Result<ForecastSurface<T>> {
    let z = T::lit(z_quantile(alpha)?);
    if mean.shape() != variance.shape() || mean.rows() != horizon_years.len() || mean.cols() != ages.len() {
        return Err(Error::ShapeMismatch {
            module: "forecasters",
            reason: "mean, variance and grid disagree".into(),
        });
    }
    if !mean.all_finite() || !variance.all_finite() {
        return Err(Error::NonFiniteInput("forecasters"));
    }
    let variance = variance.map(|v| v.max(T::zero()));
    let half = variance.map(|v| z * v.sqrt());
    let (h, j) = mean.shape();
    let lower = Matrix::from_fn(h, j, |s, x| mean[(s, x)] - half[(s, x)]);
    let upper = Matrix::from_fn(h, j, |s, x| mean[(s, x)] + half[(s, x)]);
    Ok(ForecastSurface {
        population_id: population_id.to_string(),
        ages: ages.to_vec(),
        horizon_years,
        mean,
        variance,
        lower,
        upper,
        alpha,
    })
}
