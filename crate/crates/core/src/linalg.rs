//! Small dense linear algebra: a row-major matrix, one-sided Jacobi SVD and
//! a Cholesky solver. Everything here works on the unit age grid so inner
//! products are plain dot products.

use std::ops::{Index, IndexMut};

use crate::scalar::{dot, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from a flat row-major buffer.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer does not match shape");
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. An empty slice yields a 0x0 matrix.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.cols);
        for r in self.iter_rows() {
            for i in 0..self.cols {
                let a = r[i];
                if a == T::zero() {
                    continue;
                }
                for j in i..self.cols {
                    out[(i, j)] += a * r[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        self.iter_rows().map(|r| dot(r, v)).collect()
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (r, &vi) in self.iter_rows().zip(v) {
            for (o, &x) in out.iter_mut().zip(r) {
                *o += x * vi;
            }
        }
        out
    }

    /// Keeps the first `n` rows.
    pub fn head_rows(&self, n: usize) -> Self {
        assert!(n <= self.rows);
        Self::from_vec(n, self.cols, self.data[..n * self.cols].to_vec())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Principal axes of the row space of a data matrix.
#[derive(Debug, Clone)]
pub struct PrincipalAxes<T> {
    /// Squared singular values, non-increasing.
    pub sq_singular_values: Vec<T>,
    /// One unit-norm axis per row, same order as `sq_singular_values`.
    pub axes: Matrix<T>,
}

/// Eigen-decomposition of `aᵀa` computed from `a` without forming the product.
///
/// Runs Hestenes one-sided Jacobi on whichever orientation of `a` has fewer
/// columns, so the cost is `O(min(m, n)² · max(m, n))` per sweep and small
/// singular values keep full relative accuracy. Returns at most `min(m, n)`
/// axes; axes belonging to exactly zero singular values are omitted.
pub fn principal_axes<T: Scalar>(a: &Matrix<T>) -> PrincipalAxes<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return PrincipalAxes {
            sq_singular_values: Vec::new(),
            axes: Matrix::zeros(0, n),
        };
    }
    if m < n {
        // Columns of aᵀ are the rows of a. After orthogonalisation the
        // normalised columns are the left singular vectors of aᵀ, i.e. the
        // eigenvectors of aᵀa.
        let mut cols: Vec<Vec<T>> = a.iter_rows().map(<[T]>::to_vec).collect();
        one_sided_jacobi(&mut cols, None);
        let mut pairs: Vec<(T, Vec<T>)> = cols
            .into_iter()
            .filter_map(|c| {
                let ss = dot(&c, &c);
                if ss > T::zero() {
                    let norm = ss.sqrt();
                    Some((ss, c.into_iter().map(|x| x / norm).collect()))
                } else {
                    None
                }
            })
            .collect();
        sort_desc(&mut pairs);
        pack(pairs, n)
    } else {
        // Orthogonalise the columns of a; the accumulated rotation holds the
        // right singular vectors.
        let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
        let mut v: Vec<Vec<T>> = (0..n)
            .map(|j| {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                e
            })
            .collect();
        one_sided_jacobi(&mut cols, Some(&mut v));
        let mut pairs: Vec<(T, Vec<T>)> = cols
            .iter()
            .zip(v)
            .filter_map(|(c, vj)| {
                let ss = dot(c, c);
                (ss > T::zero()).then_some((ss, vj))
            })
            .collect();
        sort_desc(&mut pairs);
        pack(pairs, n)
    }
}

fn sort_desc<T: Scalar>(pairs: &mut [(T, Vec<T>)]) {
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
}

fn pack<T: Scalar>(pairs: Vec<(T, Vec<T>)>, dim: usize) -> PrincipalAxes<T> {
    let k = pairs.len();
    let mut values = Vec::with_capacity(k);
    let mut data = Vec::with_capacity(k * dim);
    for (s, v) in pairs {
        values.push(s);
        data.extend(v);
    }
    PrincipalAxes {
        sq_singular_values: values,
        axes: Matrix::from_vec(k, dim, data),
    }
}

/// Rotates column vectors pairwise until they are mutually orthogonal,
/// applying the same rotations to `v` when given.
fn one_sided_jacobi<T: Scalar>(cols: &mut [Vec<T>], mut v: Option<&mut [Vec<T>]>) {
    let n = cols.len();
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(cols, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

#[inline]
fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Returns `None` when the matrix is not numerically positive definite.
    pub fn new(a: &Matrix<T>) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "cholesky needs a square matrix");
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(Self { lower: l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let l = &self.lower;
        let n = l.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }
}

/// Flips `v` so that its entry of largest magnitude is positive. Ties go to
/// the lowest index.
pub fn normalize_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    let mut best_abs = T::neg_infinity();
    for (j, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = j;
        }
    }
    if !v.is_empty() && v[best] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
