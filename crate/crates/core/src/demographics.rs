//! Period life tables and mortality sex ratios.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Single-year period life table with radix 1 and `a_x = 0.5`; the last age
/// is an open interval closed by a constant hazard.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    pub ages: Vec<u32>,
    pub m: Vec<f64>,
    pub q: Vec<f64>,
    pub l: Vec<f64>,
    /// Deaths `l_x q_x`.
    pub d: Vec<f64>,
    /// Person-years lived in `[x, x+1)`.
    pub big_l: Vec<f64>,
    pub e: Vec<f64>,
}

impl LifeTable {
    /// Period life expectancy at birth.
    pub fn e0(&self) -> f64 {
        self.e[0]
    }
}

/// Life table from one year's log central death rates at ages `0, 1, …`.
pub fn life_expectancy<T: Scalar>(log_rates_row: &[T]) -> Result<LifeTable> {
    if log_rates_row.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m: Vec<f64> = log_rates_row.iter().map(|v| v.as_f64().exp()).collect();
    if log_rates_row.iter().any(|v| !v.is_finite()) || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("demographics"));
    }
    let n = m.len();
    let last = n - 1;
    let q: Vec<f64> = m
        .iter()
        .enumerate()
        .map(|(x, &mx)| if x == last { 1.0 } else { (mx / (1.0 + 0.5 * mx)).min(1.0) })
        .collect();
    let mut l = vec![1.0; n];
    for x in 1..n {
        l[x] = l[x - 1] * (1.0 - q[x - 1]);
    }
    let d: Vec<f64> = l.iter().zip(&q).map(|(a, b)| a * b).collect();
    let big_l: Vec<f64> = (0..n)
        .map(|x| if x == last { l[x] / m[x] } else { l[x + 1] + 0.5 * d[x] })
        .collect();
    let mut e = vec![0.0; n];
    let mut tail = 0.0;
    for x in (0..n).rev() {
        tail += big_l[x];
        e[x] = if l[x] > 0.0 { tail / l[x] } else { 0.0 };
    }
    Ok(LifeTable {
        ages: (0..n as u32).collect(),
        m,
        q,
        l,
        d,
        big_l,
        e,
    })
}

/// `e_0` for every row of a log-rate matrix.
pub fn e0_path<T: Scalar>(log_rates: &Matrix<T>) -> Result<Vec<f64>> {
    log_rates.iter_rows().map(|r| life_expectancy(r).map(|t| t.e0())).collect()
}

/// Elementwise `exp(log_male − log_female)`.
pub fn sex_ratio<T: Scalar>(log_male: &Matrix<T>, log_female: &Matrix<T>) -> Result<Matrix<T>> {
    if log_male.shape() != log_female.shape() {
        return Err(Error::ShapeMismatch {
            module: "demographics",
            reason: format!("{:?} vs {:?}", log_male.shape(), log_female.shape()),
        });
    }
    let (r, c) = log_male.shape();
    Ok(Matrix::from_fn(r, c, |i, j| (log_male[(i, j)] - log_female[(i, j)]).exp()))
}
