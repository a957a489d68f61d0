//! Functional principal component models for forecasting mortality of
//! several related populations.
//!
//! The numerical core is generic over `f32` and `f64`; the aliases below fix
//! the common `f64` instantiation.

pub mod demographics;
pub mod error;
pub mod evaluation;
pub mod forecasters;
pub mod hmd;
pub mod linalg;
pub mod mfpca;
pub mod optim;
pub mod persist;
pub mod scalar;
pub mod smoothing;
pub mod synthetic;
pub mod tsmodels;
pub mod ufpca;

pub use error::{Error, Result};
pub use evaluation::{ComponentRule, EvalReport};
pub use forecasters::{fit_model, FittedModel, ForecastSurface, ModelConfig, ModelKind, MortalityModel};
pub use hmd::{MortalitySurface, SurfaceBundle, SurfaceKind};
pub use linalg::Matrix;
pub use mfpca::MfpcaFit;
pub use scalar::Scalar;
pub use smoothing::{ResidualField, SmoothConfig};
pub use tsmodels::{ArimaSpec, ScoreDynamics};
pub use ufpca::{FpcaFit, WeightPower, WeightScheme};

pub type Matrix64 = Matrix<f64>;
pub type Surface = MortalitySurface<f64>;
pub type Bundle = SurfaceBundle<f64>;
pub type Residuals = ResidualField<f64>;
pub type Fpca = FpcaFit<f64>;
pub type Mfpca = MfpcaFit<f64>;
pub type Weights = WeightScheme<f64>;
pub type Model = FittedModel<f64>;
pub type Forecast = ForecastSurface<f64>;
pub type Config = ModelConfig<f64>;
