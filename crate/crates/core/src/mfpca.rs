//! Multivariate FPCA from univariate decompositions.
//!
//! Univariate scores of all populations are stacked side by side, the joint
//! covariance of that score matrix is eigen-analysed, and its eigenvectors
//! map the univariate eigenfunctions and scores onto multivariate
//! eigenfunctions and scores shared by every population.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::ComponentRule;
use crate::hmd::SurfaceBundle;
use crate::linalg::Matrix;
use crate::scalar::{max_abs, Scalar};
use crate::ufpca::{fit_ufpca, scaling, weighted_eigen, FpcaFit, WeightPower, WeightScheme};

#[derive(Debug, Clone, PartialEq)]
pub struct MfpcaFit<T> {
    pub per_pop_fits: Vec<FpcaFit<T>>,
    /// Length M, non-increasing.
    pub joint_eigenvalues: Vec<T>,
    /// M × ΣN_i; columns are grouped by population in `per_pop_fits` order.
    pub block_eigenvectors: Matrix<T>,
    /// For each population an M × J matrix of multivariate eigenfunctions.
    pub multi_eigenfunctions: Vec<Matrix<T>>,
    /// T × M.
    pub shared_scores: Matrix<T>,
    pub var_explained: Vec<T>,
    pub total_variance: T,
}

impl<T: Scalar> MfpcaFit<T> {
    pub fn n_components(&self) -> usize {
        self.joint_eigenvalues.len()
    }

    pub fn n_populations(&self) -> usize {
        self.per_pop_fits.len()
    }

    pub fn n_years(&self) -> usize {
        self.shared_scores.rows()
    }

    pub fn mean_fn(&self, population: usize) -> &[T] {
        &self.per_pop_fits[population].mean_fn
    }

    /// `(start, len)` of each population's block in the stacked score vector.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.per_pop_fits
            .iter()
            .map(|f| {
                let b = (start, f.n_components());
                start += f.n_components();
                b
            })
            .collect()
    }

    /// `μ^(i) + Σ_n scores[n] ψ_n^(i)`.
    pub fn curve_from_scores(&self, population: usize, scores: &[T]) -> Vec<T> {
        let mut out = self.per_pop_fits[population].mean_fn.clone();
        let psi = &self.multi_eigenfunctions[population];
        for (n, &r) in scores.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(psi.row(n)) {
                *o += r * p;
            }
        }
        out
    }

    pub fn reconstruct(&self, population: usize, t: usize) -> Result<Vec<T>> {
        if population >= self.n_populations() {
            return Err(Error::IndexOutOfRange {
                module: "mfpca",
                index: population,
                len: self.n_populations(),
            });
        }
        if t >= self.n_years() {
            return Err(Error::IndexOutOfRange {
                module: "mfpca",
                index: t,
                len: self.n_years(),
            });
        }
        Ok(self.curve_from_scores(population, self.shared_scores.row(t)))
    }
}

/// Multivariate FPCA of several aligned curve sets (each years × ages).
///
/// Every population gets a univariate fit with the shared weights and rule.
/// The joint covariance is taken over the weight-scaled stacked scores with
/// the same normaliser as the univariate step, which for uniform weights is
/// `ΞᵀΞ / (T−1)`. Shared scores are computed from the unscaled univariate
/// scores.
pub fn fit_mfpca<T: Scalar>(
    populations: &[&Matrix<T>],
    weights: &WeightScheme<T>,
    rule: &ComponentRule,
    power: WeightPower,
) -> Result<MfpcaFit<T>> {
    let first = populations.first().ok_or(Error::EmptyBundle)?;
    if populations.iter().any(|c| c.shape() != first.shape()) {
        return Err(Error::ShapeMismatch {
            module: "mfpca",
            reason: "populations are not aligned".into(),
        });
    }
    let n_years = first.rows();
    let n_ages = first.cols();

    let per_pop_fits = populations
        .par_iter()
        .map(|c| fit_ufpca(c, weights, rule, power))
        .collect::<Result<Vec<_>>>()?;

    let total_k: usize = per_pop_fits.iter().map(FpcaFit::n_components).sum();
    let xi = Matrix::from_fn(n_years, total_k, |t, col| {
        let mut c = col;
        for f in &per_pop_fits {
            if c < f.n_components() {
                return f.scores[(t, c)];
            }
            c -= f.n_components();
        }
        unreachable!()
    });

    let (scale, norm) = scaling(weights, power);
    let (eig, vecs, total) = weighted_eigen(&xi, &scale, norm, max_abs(xi.as_slice()));
    let m = rule.select(&eig);
    let block_eigenvectors = vecs.head_rows(m);
    let joint_eigenvalues = eig[..m].to_vec();

    let mut multi_eigenfunctions = Vec::with_capacity(per_pop_fits.len());
    let mut start = 0;
    for f in &per_pop_fits {
        let k = f.n_components();
        let psi = Matrix::from_fn(m, n_ages, |n, x| {
            (0..k).fold(T::zero(), |acc, c| {
                acc + block_eigenvectors[(n, start + c)] * f.eigenfunctions[(c, x)]
            })
        });
        multi_eigenfunctions.push(psi);
        start += k;
    }
    let shared_scores = xi.matmul(&block_eigenvectors.transpose());
    let var_explained = joint_eigenvalues.iter().map(|&v| v / total).collect();

    Ok(MfpcaFit {
        per_pop_fits,
        joint_eigenvalues,
        block_eigenvectors,
        multi_eigenfunctions,
        shared_scores,
        var_explained,
        total_variance: total,
    })
}

/// [`fit_mfpca`] on the surfaces of a bundle.
pub fn fit_mfpca_bundle<T: Scalar>(
    bundle: &SurfaceBundle<T>,
    weights: &WeightScheme<T>,
    rule: &ComponentRule,
    power: WeightPower,
) -> Result<MfpcaFit<T>> {
    bundle.ensure_complete("mfpca")?;
    fit_mfpca(&bundle.curves(), weights, rule, power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_curves(rng: &mut ChaCha8Rng, t: usize, j: usize) -> Matrix<f64> {
        Matrix::from_fn(t, j, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn single_population_matches_univariate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_curves(&mut rng, 9, 6);
        let w = WeightScheme::uniform(9);
        let rule = ComponentRule::full_rank();
        let uni = fit_ufpca(&c, &w, &rule, WeightPower::One).unwrap();
        let multi = fit_mfpca(&[&c], &w, &rule, WeightPower::One).unwrap();
        let m = multi.n_components();
        assert_eq!(m, uni.n_components());
        for n in 0..m {
            for k in 0..m {
                let expect = if n == k { 1.0 } else { 0.0 };
                assert!((multi.block_eigenvectors[(n, k)] - expect).abs() < 1e-8);
            }
        }
        for t in 0..9 {
            let a = multi.reconstruct(0, t).unwrap();
            let b = uni.reconstruct(t).unwrap();
            for x in 0..6 {
                assert!((a[x] - b[x]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn independent_factors_stay_in_their_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = 40;
        let j = 7;
        let unit = |v: Vec<f64>| {
            let n = dot(&v, &v).sqrt();
            v.into_iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let phi1 = unit((0..j).map(|x| 1.0 + x as f64).collect());
        let phi2 = unit((0..j).map(|x| (x as f64).cos()).collect());
        // exact zero correlation, sample variances 4 and 1
        let mut a: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ma = a.iter().sum::<f64>() / t as f64;
        a.iter_mut().for_each(|v| *v -= ma);
        let mut b: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mb = b.iter().sum::<f64>() / t as f64;
        b.iter_mut().for_each(|v| *v -= mb);
        let proj = dot(&a, &b) / dot(&a, &a);
        b.iter_mut().zip(&a).for_each(|(v, &x)| *v -= proj * x);
        let sa = (dot(&a, &a) / (t - 1) as f64).sqrt();
        let sb = (dot(&b, &b) / (t - 1) as f64).sqrt();
        a.iter_mut().for_each(|v| *v *= 2.0 / sa);
        b.iter_mut().for_each(|v| *v /= sb);

        let c1 = Matrix::from_fn(t, j, |r, x| a[r] * phi1[x]);
        let c2 = Matrix::from_fn(t, j, |r, x| b[r] * phi2[x]);
        let fit = fit_mfpca(&[&c1, &c2], &WeightScheme::uniform(t), &ComponentRule::full_rank(), WeightPower::One)
            .unwrap();
        assert_eq!(fit.n_components(), 2);
        assert!((fit.joint_eigenvalues[0] - 4.0).abs() < 1e-10);
        assert!((fit.joint_eigenvalues[1] - 1.0).abs() < 1e-10);
        assert!(fit.multi_eigenfunctions[1].row(0).iter().all(|v| v.abs() < 1e-6));
        assert!(fit.multi_eigenfunctions[0].row(1).iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn scaling_the_covariance_only_scales_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c1 = random_curves(&mut rng, 10, 5);
        let c2 = random_curves(&mut rng, 10, 5);
        let rule = ComponentRule::full_rank();
        let w = WeightScheme::uniform(10);
        let base = fit_mfpca(&[&c1, &c2], &w, &rule, WeightPower::One).unwrap();
        let a = 3.0f64;
        let s1 = c1.map(|v| v * a.sqrt());
        let s2 = c2.map(|v| v * a.sqrt());
        let scaled = fit_mfpca(&[&s1, &s2], &w, &rule, WeightPower::One).unwrap();
        assert_eq!(base.n_components(), scaled.n_components());
        for n in 0..base.n_components() {
            assert!((scaled.joint_eigenvalues[n] - a * base.joint_eigenvalues[n]).abs() < 1e-9);
            assert!((scaled.var_explained[n] - base.var_explained[n]).abs() < 1e-12);
        }
        assert!(base.block_eigenvectors.max_abs_diff(&scaled.block_eigenvectors) < 1e-8);
    }

    #[test]
    fn empty_and_misaligned() {
        let w = WeightScheme::<f64>::uniform(3);
        assert!(matches!(fit_mfpca(&[], &w, &ComponentRule::default(), WeightPower::One), Err(Error::EmptyBundle)));
        let a = Matrix::<f64>::zeros(3, 4);
        let b = Matrix::<f64>::zeros(3, 5);
        assert!(fit_mfpca(&[&a, &b], &w, &ComponentRule::default(), WeightPower::One).is_err());
    }

    #[test]
    fn zero_components_reconstruct_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c1 = random_curves(&mut rng, 6, 4);
        let c2 = random_curves(&mut rng, 6, 4);
        let fit = fit_mfpca(
            &[&c1, &c2],
            &WeightScheme::uniform(6),
            &ComponentRule::fixed(0),
            WeightPower::One,
        )
        .unwrap();
        assert_eq!(fit.n_components(), 0);
        assert_eq!(fit.reconstruct(1, 2).unwrap(), fit.mean_fn(1).to_vec());
        assert!(fit.reconstruct(2, 0).is_err());
    }
}
