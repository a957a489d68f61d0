//! Univariate functional principal component analysis on a unit age grid.

use crate::error::{Error, Result};
use crate::evaluation::ComponentRule;
use crate::linalg::{normalize_sign, principal_axes, Matrix};
use crate::scalar::{dot, max_abs, Scalar};

/// Eigenvalues below this fraction of the leading one are numerical zeros.
pub const EIGEN_REL_TOL: f64 = 1e-12;

/// Observation weights over the fitting years, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme<T> {
    pub kappa: Option<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> WeightScheme<T> {
    pub fn uniform(n_years: usize) -> Self {
        let w = T::one() / T::from_count(n_years.max(1));
        Self {
            kappa: None,
            weights: vec![w; n_years],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.kappa.is_none()
    }

    /// The same scheme for a shorter or longer span.
    pub fn resized(&self, n_years: usize) -> Result<Self> {
        match self.kappa {
            Some(k) => geometric_weights(k, n_years),
            None => Ok(Self::uniform(n_years)),
        }
    }
}

/// Geometrically decaying weights `κ(1−κ)^{T−t}`, normalised to sum to one.
pub fn geometric_weights<T: Scalar>(kappa: T, n_years: usize) -> Result<WeightScheme<T>> {
    if !(kappa > T::zero() && kappa < T::one()) {
        return Err(Error::KappaOutOfRange(kappa.as_f64()));
    }
    if n_years == 0 {
        return Err(Error::InsufficientYears { need: 1, got: 0 });
    }
    let decay = T::one() - kappa;
    let raw: Vec<T> = (1..=n_years)
        .map(|t| kappa * decay.powi((n_years - t) as i32))
        .collect();
    // Σ raw = 1 − (1−κ)^T, computed without cancellation for small κ.
    let total = -(T::from_count(n_years) * (-kappa).ln_1p()).exp_m1();
    Ok(WeightScheme {
        kappa: Some(kappa),
        weights: raw.into_iter().map(|w| w / total).collect(),
    })
}

/// Exponent applied to the weights when scaling centred curves: the centred
/// row for year t is multiplied by `w_t^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightPower {
    /// Multiply by `w_t`.
    #[default]
    One,
    /// Multiply by `√w_t`, the usual weighted-PCA convention.
    Half,
}

impl WeightPower {
    pub fn apply<T: Scalar>(self, w: T) -> T {
        match self {
            WeightPower::One => w,
            WeightPower::Half => w.sqrt(),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            WeightPower::One => 1.0,
            WeightPower::Half => 0.5,
        }
    }
}

/// Row multipliers and covariance normaliser for a weight scheme.
///
/// The normaliser `1 / (V₁ − V₂/V₁)` with `v_t = s_t²` turns `Σ_t s_t² c_t c_tᵀ`
/// into the usual `CᵀC / (T−1)` when the weights are uniform.
pub(crate) fn scaling<T: Scalar>(weights: &WeightScheme<T>, power: WeightPower) -> (Vec<T>, T) {
    let s: Vec<T> = weights.weights.iter().map(|&w| power.apply(w)).collect();
    let v1: T = s.iter().map(|&x| x * x).sum();
    let v2: T = s.iter().map(|&x| x * x * x * x).sum();
    let denom = v1 - v2 / v1;
    let norm = if denom > T::zero() { T::one() / denom } else { T::one() };
    (s, norm)
}

/// Eigen-decomposition of the weighted covariance of the rows of `centred`
/// (already mean-removed). Returns all numerically non-zero eigenvalues in
/// decreasing order with sign-normalised unit eigenvectors, plus the total
/// variance (trace).
pub(crate) fn weighted_eigen<T: Scalar>(
    centred: &Matrix<T>,
    scale: &[T],
    norm: T,
    data_scale: T,
) -> (Vec<T>, Matrix<T>, T) {
    let scaled = Matrix::from_fn(centred.rows(), centred.cols(), |t, j| scale[t] * centred[(t, j)]);
    let axes = principal_axes(&scaled);
    let eig: Vec<T> = axes.sq_singular_values.iter().map(|&s| s * norm).collect();
    let total: T = eig.iter().copied().sum();
    let floor = {
        let e = T::epsilon() * T::lit(64.0) * (T::one() + data_scale);
        e * e * T::from_count(centred.cols().max(1))
    };
    let lead = eig.first().copied().unwrap_or(T::zero());
    if lead <= floor {
        return (Vec::new(), Matrix::zeros(0, centred.cols()), T::zero());
    }
    let keep = eig
        .iter()
        .take_while(|&&l| l > lead * T::lit(EIGEN_REL_TOL))
        .count();
    let mut vecs = Matrix::zeros(keep, centred.cols());
    for n in 0..keep {
        let row = vecs.row_mut(n);
        row.copy_from_slice(axes.axes.row(n));
        normalize_sign(row);
    }
    (eig[..keep].to_vec(), vecs, total)
}

/// A fitted univariate decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct FpcaFit<T> {
    pub mean_fn: Vec<T>,
    /// N × J, one eigenfunction per row.
    pub eigenfunctions: Matrix<T>,
    /// Length N, non-increasing.
    pub eigenvalues: Vec<T>,
    /// T × N projections of the unscaled centred curves.
    pub scores: Matrix<T>,
    /// Share of total variance carried by each retained component.
    pub var_explained: Vec<T>,
    /// Sum of all numerically non-zero eigenvalues, retained or not.
    pub total_variance: T,
    pub weights: WeightScheme<T>,
}

impl<T: Scalar> FpcaFit<T> {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_years(&self) -> usize {
        self.scores.rows()
    }

    pub fn n_ages(&self) -> usize {
        self.mean_fn.len()
    }

    /// Score series of component `n`.
    pub fn score_series(&self, n: usize) -> Vec<T> {
        self.scores.col(n)
    }

    /// `mean + Σ_n scores[n] φ_n` for an arbitrary score vector.
    pub fn curve_from_scores(&self, scores: &[T]) -> Vec<T> {
        assert_eq!(scores.len(), self.n_components());
        let mut out = self.mean_fn.clone();
        for (n, &b) in scores.iter().enumerate() {
            for (o, &phi) in out.iter_mut().zip(self.eigenfunctions.row(n)) {
                *o += b * phi;
            }
        }
        out
    }

    /// Rank-truncated reconstruction of year index `t`.
    pub fn reconstruct(&self, t: usize) -> Result<Vec<T>> {
        if t >= self.n_years() {
            return Err(Error::IndexOutOfRange {
                module: "ufpca",
                index: t,
                len: self.n_years(),
            });
        }
        Ok(self.curve_from_scores(self.scores.row(t)))
    }

    /// Scores of a new curve: projection of `curve − mean` on the eigenfunctions.
    pub fn project(&self, curve: &[T]) -> Vec<T> {
        let centred: Vec<T> = curve.iter().zip(&self.mean_fn).map(|(&c, &m)| c - m).collect();
        self.eigenfunctions.mul_vec(&centred)
    }
}

/// Fits a univariate FPCA to the rows of `curves` (years × ages).
///
/// The mean is the weighted average of the curves. Centred rows are
/// multiplied by `w_t^power` before the eigen-analysis, while the returned
/// scores project the unscaled centred curves. A data set with no variance
/// gives a fit with zero components.
pub fn fit_ufpca<T: Scalar>(
    curves: &Matrix<T>,
    weights: &WeightScheme<T>,
    rule: &ComponentRule,
    power: WeightPower,
) -> Result<FpcaFit<T>> {
    let (n_years, n_ages) = curves.shape();
    if n_years < 2 {
        return Err(Error::InsufficientYears { need: 2, got: n_years });
    }
    if weights.len() != n_years {
        return Err(Error::ShapeMismatch {
            module: "ufpca",
            reason: format!("{} weights for {} years", weights.len(), n_years),
        });
    }
    if !curves.all_finite() {
        return Err(Error::NonFiniteInput("ufpca"));
    }

    let mut mean_fn = vec![T::zero(); n_ages];
    for (row, &w) in curves.iter_rows().zip(&weights.weights) {
        for (m, &x) in mean_fn.iter_mut().zip(row) {
            *m += w * x;
        }
    }
    let centred = Matrix::from_fn(n_years, n_ages, |t, j| curves[(t, j)] - mean_fn[j]);
    let (scale, norm) = scaling(weights, power);
    let (eig, vecs, total) = weighted_eigen(&centred, &scale, norm, max_abs(curves.as_slice()));

    let n = rule.select(&eig);
    let eigenfunctions = vecs.head_rows(n);
    let eigenvalues = eig[..n].to_vec();
    let scores = Matrix::from_fn(n_years, n, |t, k| dot(centred.row(t), eigenfunctions.row(k)));
    let var_explained = eigenvalues.iter().map(|&l| l / total).collect();
    Ok(FpcaFit {
        mean_fn,
        eigenfunctions,
        eigenvalues,
        scores,
        var_explained,
        total_variance: total,
        weights: weights.clone(),
    })
}
