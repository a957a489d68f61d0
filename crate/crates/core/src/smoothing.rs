//! Penalized cubic B-spline smoothing of log-rate curves.
//!
//! Each curve is fitted by ridge-penalised least squares on an equally spaced
//! cubic B-spline basis with a difference penalty on the coefficients. The
//! smoothing parameter is picked from a fixed grid by generalised
//! cross-validation, then the fitted values above `monotone_from_age` are
//! projected onto the non-decreasing cone with pool-adjacent-violators.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hmd::{MortalitySurface, SurfaceKind};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothConfig {
    pub basis_dim: usize,
    pub penalty_order: usize,
    pub lambda_grid: Vec<f64>,
    pub monotone_from_age: u32,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        let lambda_grid = (0..20)
            .map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 19.0))
            .collect();
        Self {
            basis_dim: 30,
            penalty_order: 2,
            lambda_grid,
            monotone_from_age: 65,
        }
    }
}

impl SmoothConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidConfig {
            module: "smoothing",
            reason,
        });
        if self.basis_dim < 4 {
            return bad(format!("basis_dim {} < 4 for a cubic basis", self.basis_dim));
        }
        if self.basis_dim < self.penalty_order + 1 {
            return bad(format!(
                "basis_dim {} < penalty_order + 1 = {}",
                self.basis_dim,
                self.penalty_order + 1
            ));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return bad("lambda_grid must be non-empty with positive entries".into());
        }
        if self.monotone_from_age > crate::hmd::MAX_AGE {
            return bad(format!("monotone_from_age {} > 100", self.monotone_from_age));
        }
        Ok(())
    }
}

/// Absolute smoothing residuals and their per-age root mean square.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField<T> {
    /// years × ages, all ≥ 0.
    pub sigma: Matrix<T>,
    /// `sigma_avg[j]² = mean_t sigma[t][j]²`.
    pub sigma_avg: Vec<T>,
}

impl<T: Scalar> ResidualField<T> {
    pub fn from_sigma(sigma: Matrix<T>) -> Self {
        let n = T::from_count(sigma.rows().max(1));
        let sigma_avg = (0..sigma.cols())
            .map(|j| {
                let ss: T = sigma.iter_rows().map(|r| r[j] * r[j]).sum();
                (ss / n).sqrt()
            })
            .collect();
        Self { sigma, sigma_avg }
    }

    pub fn zeros(years: usize, ages: usize) -> Self {
        Self::from_sigma(Matrix::zeros(years, ages))
    }

    /// Field restricted to the first `n` years, with the average recomputed.
    pub fn head_years(&self, n: usize) -> Self {
        Self::from_sigma(self.sigma.head_rows(n))
    }

    pub fn sigma_avg_sq(&self) -> Vec<T> {
        self.sigma_avg.iter().map(|&s| s * s).collect()
    }
}

/// Cubic B-spline basis with `k` functions on equally spaced knots covering
/// `[lo, hi]`, evaluated at `xs`. Returns an `xs.len() × k` design matrix.
pub fn bspline_basis<T: Scalar>(xs: &[T], lo: T, hi: T, k: usize) -> Matrix<T> {
    const DEGREE: usize = 3;
    assert!(k > DEGREE, "need more basis functions than the degree");
    let segments = k - DEGREE;
    let dx = (hi - lo) / T::from_count(segments);
    let n_knots = k + DEGREE + 1;
    let knots: Vec<T> = (0..n_knots)
        .map(|i| lo + (T::from_count(i) - T::from_count(DEGREE)) * dx)
        .collect();
    let mut design = Matrix::zeros(xs.len(), k);
    let mut b = vec![T::zero(); n_knots - 1];
    for (r, &x) in xs.iter().enumerate() {
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = if knots[i] <= x && x < knots[i + 1] { T::one() } else { T::zero() };
        }
        // Right end of the covered range belongs to the last interior span.
        if x >= knots[k] {
            b.iter_mut().for_each(|v| *v = T::zero());
            b[k - 1] = T::one();
        }
        for d in 1..=DEGREE {
            for i in 0..n_knots - 1 - d {
                let left = (x - knots[i]) / (knots[i + d] - knots[i]) * b[i];
                let right = (knots[i + d + 1] - x) / (knots[i + d + 1] - knots[i + 1]) * b[i + 1];
                b[i] = left + right;
            }
        }
        design.row_mut(r).copy_from_slice(&b[..k]);
    }
    design
}

/// `order`-th difference operator as a `(k - order) × k` matrix.
pub fn difference_matrix<T: Scalar>(k: usize, order: usize) -> Matrix<T> {
    let mut d = Matrix::identity(k);
    for _ in 0..order {
        let rows = d.rows() - 1;
        d = Matrix::from_fn(rows, k, |i, j| d[(i + 1, j)] - d[(i, j)]);
    }
    d
}

/// Result of a single penalized fit.
#[derive(Debug, Clone)]
pub struct SplineFit<T> {
    pub coef: Vec<T>,
    pub fitted: Vec<T>,
    pub lambda: T,
    /// Trace of the hat matrix.
    pub edf: T,
    pub gcv: T,
}

struct LambdaSystem<T> {
    lambda: T,
    chol: Cholesky<T>,
    edf: T,
}

/// A penalized spline smoother for a fixed age grid. Factorisations and
/// effective degrees of freedom for every grid λ are computed once, so
/// smoothing many rows of the same surface is cheap.
pub struct PenalizedSpline<T> {
    basis: Matrix<T>,
    penalty: Matrix<T>,
    systems: Vec<LambdaSystem<T>>,
    monotone_start: Option<usize>,
}

impl<T: Scalar> PenalizedSpline<T> {
    pub fn new(ages: &[u32], config: &SmoothConfig) -> Result<Self> {
        config.validate()?;
        if ages.len() < config.basis_dim {
            return Err(Error::InvalidConfig {
                module: "smoothing",
                reason: format!("{} ages < basis_dim {}", ages.len(), config.basis_dim),
            });
        }
        let xs: Vec<T> = ages.iter().map(|&a| T::from_count(a as usize)).collect();
        let basis = bspline_basis(&xs, xs[0], *xs.last().unwrap(), config.basis_dim);
        let diff = difference_matrix::<T>(config.basis_dim, config.penalty_order);
        let penalty = diff.gram();
        let btb = basis.gram();
        let k = config.basis_dim;
        let systems = config
            .lambda_grid
            .iter()
            .map(|&l| {
                let lambda = T::lit(l);
                let a = Matrix::from_fn(k, k, |i, j| btb[(i, j)] + lambda * penalty[(i, j)]);
                let chol = Cholesky::new(&a).ok_or(Error::SingularSystem)?;
                // edf = tr(A⁻¹ BᵀB)
                let mut edf = T::zero();
                for j in 0..k {
                    let col = chol.solve(&btb.col(j));
                    edf += col[j];
                }
                Ok(LambdaSystem { lambda, chol, edf })
            })
            .collect::<Result<Vec<_>>>()?;
        let monotone_start = ages.iter().position(|&a| a >= config.monotone_from_age);
        Ok(Self {
            basis,
            penalty,
            systems,
            monotone_start,
        })
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    /// Penalized least-squares criterion `‖y − Bc‖² + λ cᵀPc`.
    pub fn criterion(&self, y: &[T], coef: &[T], lambda: T) -> T {
        let fitted = self.basis.mul_vec(coef);
        let rss: T = y.iter().zip(&fitted).map(|(&a, &b)| (a - b) * (a - b)).sum();
        rss + lambda * dot(coef, &self.penalty.mul_vec(coef))
    }

    fn fit_system(&self, y: &[T], sys: &LambdaSystem<T>) -> SplineFit<T> {
        let rhs = self.basis.tr_mul_vec(y);
        let coef = sys.chol.solve(&rhs);
        let fitted = self.basis.mul_vec(&coef);
        let n = T::from_count(y.len());
        let rss: T = y.iter().zip(&fitted).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let denom = n - sys.edf;
        let gcv = n * rss / (denom * denom);
        SplineFit {
            coef,
            fitted,
            lambda: sys.lambda,
            edf: sys.edf,
            gcv,
        }
    }

    /// Unconstrained fit at the grid λ with index `idx`.
    pub fn fit_at(&self, y: &[T], idx: usize) -> SplineFit<T> {
        self.fit_system(y, &self.systems[idx])
    }

    /// Unconstrained fit at the GCV-optimal grid λ. Ties go to the earlier
    /// grid entry.
    pub fn fit_gcv(&self, y: &[T]) -> Result<SplineFit<T>> {
        if y.len() != self.basis.rows() {
            return Err(Error::ShapeMismatch {
                module: "smoothing",
                reason: format!("curve has {} points, grid has {}", y.len(), self.basis.rows()),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("smoothing"));
        }
        let mut best: Option<SplineFit<T>> = None;
        for sys in &self.systems {
            let fit = self.fit_system(y, sys);
            if best.as_ref().is_none_or(|b| fit.gcv < b.gcv) {
                best = Some(fit);
            }
        }
        best.ok_or(Error::SingularSystem)
    }

    /// GCV fit followed by the monotone projection above the configured age.
    pub fn smooth(&self, y: &[T]) -> Result<Vec<T>> {
        let mut fitted = self.fit_gcv(y)?.fitted;
        self.enforce_monotone(&mut fitted);
        Ok(fitted)
    }

    fn enforce_monotone(&self, fitted: &mut [T]) {
        if let Some(start) = self.monotone_start {
            let tail = pava_increasing(&fitted[start..]);
            fitted[start..].copy_from_slice(&tail);
        }
    }
}

/// Least-squares projection of `y` onto non-decreasing sequences
/// (pool-adjacent-violators, unit weights).
pub fn pava_increasing<T: Scalar>(y: &[T]) -> Vec<T> {
    // (block mean, block size)
    let mut blocks: Vec<(T, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        let mut mean = v;
        let mut size = 1usize;
        while let Some(&(prev_mean, prev_size)) = blocks.last() {
            if prev_mean <= mean {
                break;
            }
            blocks.pop();
            let total = T::from_count(prev_size + size);
            mean = (prev_mean * T::from_count(prev_size) + mean * T::from_count(size)) / total;
            size += prev_size;
        }
        blocks.push((mean, size));
    }
    blocks
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat_n(m, n))
        .collect()
}

/// Smooths one curve observed at ages `0..row.len()`.
pub fn smooth_curve<T: Scalar>(row: &[T], config: &SmoothConfig) -> Result<Vec<T>> {
    let ages: Vec<u32> = (0..row.len() as u32).collect();
    PenalizedSpline::new(&ages, config)?.smooth(row)
}

/// Smooths every year of an observed surface and records the absolute
/// residuals.
pub fn smooth_surface<T: Scalar>(
    surface: &MortalitySurface<T>,
    config: &SmoothConfig,
) -> Result<(MortalitySurface<T>, ResidualField<T>)> {
    if surface.kind != SurfaceKind::Observed {
        return Err(Error::InvalidConfig {
            module: "smoothing",
            reason: format!("{} is already smoothed", surface.population_id),
        });
    }
    let spline = PenalizedSpline::new(&surface.ages, config)?;
    let rows: Vec<Vec<T>> = (0..surface.n_years())
        .into_par_iter()
        .map(|t| spline.smooth(surface.log_rates.row(t)))
        .collect::<Result<Vec<_>>>()?;
    let smoothed = Matrix::from_rows(&rows);
    let sigma = Matrix::from_fn(surface.n_years(), surface.n_ages(), |t, j| {
        (surface.log_rates[(t, j)] - smoothed[(t, j)]).abs()
    });
    let out = MortalitySurface {
        population_id: surface.population_id.clone(),
        ages: surface.ages.clone(),
        years: surface.years.clone(),
        log_rates: smoothed,
        kind: SurfaceKind::Smoothed,
    };
    Ok((out, ResidualField::from_sigma(sigma)))
}
