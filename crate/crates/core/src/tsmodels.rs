//! ARIMA models for principal component score series.
//!
//! Parameters are estimated by conditional sum of squares: residuals are
//! computed recursively with pre-sample innovations set to zero, and every
//! candidate order is scored on the same set of time points so that AIC
//! values are comparable across differencing orders. The innovation
//! variance is concentrated out of the Gaussian likelihood.

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::scalar::Scalar;

pub const MAX_P: usize = 2;
pub const MAX_D: usize = 2;
pub const MAX_Q: usize = 2;
pub const MIN_SERIES_LEN: usize = 10;

/// AR roots must lie strictly outside this modulus in non-stationary mode.
pub const ROOT_MARGIN: f64 = 1.001;
/// Root margin used when the series must be modelled as stationary.
///
/// `1.05` bounds the AR decay factor by `0.952`, so forecasts return to the
/// process mean within a few hundred steps.
pub const STATIONARY_ROOT_MARGIN: f64 = 1.05;

/// Distance between an AR and an MA reciprocal root below which the two
/// factors are treated as cancelling.
pub const COMMON_FACTOR_TOL: f64 = 0.1;

/// How a score series is allowed to evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDynamics {
    /// ARIMA with d ∈ {0, 1, 2}.
    Nonstationary,
    /// ARMA (d = 0) with stationary AR part and optional mean.
    Stationary,
    /// Stationary ARMA around zero. Used for series that are centred by
    /// construction, so forecasts revert to zero.
    StationaryZeroMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    /// Constant on the differenced scale: the mean when `d = 0`, the drift
    /// when `d = 1`.
    pub include_drift: bool,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub drift: f64,
    pub innovation_var: f64,
    pub loglik: f64,
    pub aic: f64,
    /// True when no grid cell could be fitted and a default model was used.
    pub fallback: bool,
}

impl ArimaSpec {
    pub fn n_params(&self) -> usize {
        self.p + self.q + 1 + usize::from(self.include_drift)
    }

    pub fn order(&self) -> (usize, usize, usize) {
        (self.p, self.d, self.q)
    }

    pub fn is_stationary(&self, margin: f64) -> bool {
        self.d == 0 && ar_roots_outside(&self.ar, margin)
    }

    /// Mean the forecasts revert to when `d = 0`.
    pub fn process_mean(&self) -> f64 {
        if self.include_drift {
            self.drift
        } else {
            0.0
        }
    }

    /// Psi weights of the full (integrated) model, `ψ_0 = 1`.
    pub fn psi_weights(&self, n: usize) -> Vec<f64> {
        // φ*(B) = φ(B)(1 − B)^d written as 1 − Σ a_i B^i
        let mut poly = vec![1.0];
        for &phi in &self.ar {
            poly.push(-phi);
        }
        for _ in 0..self.d {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c;
            }
            poly = next;
        }
        let a: Vec<f64> = poly[1..].iter().map(|c| -c).collect();
        let mut psi = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = if j == 0 {
                1.0
            } else if j <= self.q {
                self.ma[j - 1]
            } else {
                0.0
            };
            for (i, &ai) in a.iter().enumerate() {
                if i < j {
                    v += ai * psi[j - i - 1];
                }
            }
            psi.push(v);
        }
        psi
    }
}

/// Whether all roots of `1 − φ₁z − … − φ_p z^p` have modulus above `margin`.
pub fn ar_roots_outside(ar: &[f64], margin: f64) -> bool {
    let limit = 1.0 / margin;
    match ar.len() {
        0 => true,
        1 => ar[0].abs() < limit,
        2 => {
            // reciprocal roots solve r² − φ₁r − φ₂ = 0
            let (p1, p2) = (ar[0], ar[1]);
            let disc = p1 * p1 + 4.0 * p2;
            let max_mod = if disc >= 0.0 {
                let s = disc.sqrt();
                ((p1 + s) / 2.0).abs().max(((p1 - s) / 2.0).abs())
            } else {
                (-p2).sqrt()
            };
            max_mod < limit
        }
        _ => unimplemented!("AR order above 2"),
    }
}

/// Whether all roots of `1 + θ₁z + … + θ_q z^q` lie outside [`ROOT_MARGIN`].
pub fn ma_invertible(ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    ar_roots_outside(&neg, ROOT_MARGIN)
}

/// Reciprocal roots of `1 − a₁z − a₂z²` as `(re, im)` pairs.
fn reciprocal_roots(a: &[f64]) -> Vec<(f64, f64)> {
    match a.len() {
        0 => Vec::new(),
        1 => vec![(a[0], 0.0)],
        2 => {
            let disc = a[0] * a[0] + 4.0 * a[1];
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![((a[0] + s) / 2.0, 0.0), ((a[0] - s) / 2.0, 0.0)]
            } else {
                let im = (-disc).sqrt() / 2.0;
                vec![(a[0] / 2.0, im), (a[0] / 2.0, -im)]
            }
        }
        _ => unimplemented!("polynomial order above 2"),
    }
}

/// Whether the AR and MA polynomials share a factor up to `COMMON_FACTOR_TOL`
/// in their reciprocal roots. Such a model is not identified: the shared
/// factor cancels and leaves a smaller ARMA.
pub fn has_common_factor(ar: &[f64], ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    let ra = reciprocal_roots(ar);
    let rm = reciprocal_roots(&neg);
    ra.iter()
        .any(|a| rm.iter().any(|m| (a.0 - m.0).hypot(a.1 - m.1) < COMMON_FACTOR_TOL))
}

/// Forecast means and variances for horizons `1..=h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreForecast<T> {
    pub mean: Vec<T>,
    pub variance: Vec<T>,
    pub spec: ArimaSpec,
}

pub fn difference(series: &[f64], d: usize) -> Vec<f64> {
    let mut w = series.to_vec();
    for _ in 0..d {
        w = w.windows(2).map(|p| p[1] - p[0]).collect();
    }
    w
}

/// CSS residuals of an ARMA(p, q) with constant `c` on the differenced
/// series `w`. Residuals before index `p` are zero.
fn css_residuals(w: &[f64], ar: &[f64], ma: &[f64], c: f64) -> Vec<f64> {
    let mut e = vec![0.0; w.len()];
    css_residuals_into(w, ar, ma, c, &mut e);
    e
}

fn css_residuals_into(w: &[f64], ar: &[f64], ma: &[f64], c: f64, e: &mut [f64]) {
    let p = ar.len();
    e[..p.min(w.len())].fill(0.0);
    for k in p..w.len() {
        let mut pred = c;
        for (i, &phi) in ar.iter().enumerate() {
            pred += phi * (w[k - i - 1] - c);
        }
        for (j, &theta) in ma.iter().enumerate() {
            if k > j {
                pred += theta * e[k - j - 1];
            }
        }
        e[k] = w[k] - pred;
    }
}

struct Cell {
    p: usize,
    d: usize,
    q: usize,
    drift: bool,
}

fn variance_floor(series: &[f64]) -> f64 {
    let ms = series.iter().map(|v| v * v).sum::<f64>() / series.len() as f64;
    f64::EPSILON * f64::EPSILON * (1.0 + ms)
}

/// Fits one order by CSS. `eval_from` is the first index of the original
/// series whose residual enters the likelihood.
fn fit_cell(series: &[f64], cell: &Cell, eval_from: usize) -> Option<ArimaSpec> {
    let w = difference(series, cell.d);
    let skip = eval_from.checked_sub(cell.d)?;
    if skip < cell.p || skip >= w.len() {
        return None;
    }
    let n_eval = w.len() - skip;
    let wmean = w.iter().sum::<f64>() / w.len() as f64;
    let wsd = (w.iter().map(|v| (v - wmean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();

    let n_par = cell.p + cell.q + usize::from(cell.drift);
    let split = |x: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        let ar = x[..cell.p].to_vec();
        let ma = x[cell.p..cell.p + cell.q].to_vec();
        let c = if cell.drift { x[cell.p + cell.q] } else { 0.0 };
        (ar, ma, c)
    };
    let mut buf = vec![0.0; w.len()];
    let mut sse = |x: &[f64]| -> f64 {
        let ar = &x[..cell.p];
        let ma = &x[cell.p..cell.p + cell.q];
        let c = if cell.drift { x[cell.p + cell.q] } else { 0.0 };
        if !ma_invertible(ma) {
            return f64::INFINITY;
        }
        css_residuals_into(&w, ar, ma, c, &mut buf);
        buf[skip..].iter().map(|v| v * v).sum()
    };

    let mut start = vec![0.0; n_par];
    let mut steps = vec![0.1; n_par];
    if cell.drift {
        start[n_par - 1] = wmean;
        steps[n_par - 1] = 0.1 * wsd + 1e-3 * (1.0 + wmean.abs());
    }
    let (x, value) = if n_par == 0 {
        (Vec::new(), sse(&[]))
    } else {
        let opts = NelderMeadOptions::default();
        let first = nelder_mead(&mut sse, &start, &steps, opts);
        let restart_steps: Vec<f64> = steps.iter().map(|s| s * 0.5).collect();
        let second = nelder_mead(&mut sse, &first.x, &restart_steps, opts);
        if second.value <= first.value {
            (second.x, second.value)
        } else {
            (first.x, first.value)
        }
    };
    if !value.is_finite() {
        return None;
    }
    let (ar, ma, drift) = split(&x);
    let sigma2 = (value / n_eval as f64).max(variance_floor(series));
    let n = n_eval as f64;
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = cell.p + cell.q + 1 + usize::from(cell.drift);
    Some(ArimaSpec {
        p: cell.p,
        d: cell.d,
        q: cell.q,
        include_drift: cell.drift,
        ar,
        ma,
        drift,
        innovation_var: sigma2,
        loglik,
        aic: 2.0 * k as f64 - 2.0 * loglik,
        fallback: false,
    })
}

fn to_f64<T: Scalar>(series: &[T]) -> Result<Vec<f64>> {
    let s: Vec<f64> = series.iter().map(|v| v.as_f64()).collect();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("tsmodels"));
    }
    Ok(s)
}

/// Fits one fixed order by CSS, scoring residuals from index `p + d`.
pub fn fit_order<T: Scalar>(series: &[T], p: usize, d: usize, q: usize, include_drift: bool) -> Result<ArimaSpec> {
    let s = to_f64(series)?;
    if s.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            min: MIN_SERIES_LEN,
        });
    }
    let cell = Cell { p, d, q, drift: include_drift };
    fit_cell(&s, &cell, p + d).ok_or_else(|| Error::Model(format!("ARIMA({p},{d},{q}) could not be fitted")))
}

fn fallback_spec(series: &[f64], mode: ScoreDynamics) -> ArimaSpec {
    let (d, drift_on) = match mode {
        ScoreDynamics::Nonstationary => (1, true),
        ScoreDynamics::Stationary => (0, true),
        ScoreDynamics::StationaryZeroMean => (0, false),
    };
    let w = difference(series, d);
    let c = if drift_on { w.iter().sum::<f64>() / w.len() as f64 } else { 0.0 };
    let sigma2 = (w.iter().map(|v| (v - c).powi(2)).sum::<f64>() / w.len() as f64).max(variance_floor(series));
    let n = w.len() as f64;
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = 1 + usize::from(drift_on);
    ArimaSpec {
        p: 0,
        d,
        q: 0,
        include_drift: drift_on,
        ar: Vec::new(),
        ma: Vec::new(),
        drift: c,
        innovation_var: sigma2,
        loglik,
        aic: 2.0 * k as f64 - 2.0 * loglik,
        fallback: true,
    }
}

/// Minimum-AIC model over the order grid allowed by `mode`.
///
/// Cells are visited in order of increasing d, p, q with the constant-free
/// variant first; a later cell replaces the incumbent only with a strictly
/// smaller AIC. Cells whose AR part violates the root margin, or whose AR
/// and MA parts nearly cancel, are rejected.
pub fn fit_auto<T: Scalar>(series: &[T], mode: ScoreDynamics) -> Result<ArimaSpec> {
    let s = to_f64(series)?;
    if s.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            min: MIN_SERIES_LEN,
        });
    }
    let (d_max, margin) = match mode {
        ScoreDynamics::Nonstationary => (MAX_D, ROOT_MARGIN),
        _ => (0, STATIONARY_ROOT_MARGIN),
    };
    let eval_from = d_max + MAX_P;
    let mut best: Option<ArimaSpec> = None;
    for d in 0..=d_max {
        for p in 0..=MAX_P {
            for q in 0..=MAX_Q {
                let drifts: &[bool] = match mode {
                    ScoreDynamics::StationaryZeroMean => &[false],
                    _ if d <= 1 => &[false, true],
                    _ => &[false],
                };
                for &drift in drifts {
                    let cell = Cell { p, d, q, drift };
                    let Some(spec) = fit_cell(&s, &cell, eval_from) else {
                        continue;
                    };
                    if !ar_roots_outside(&spec.ar, margin) || has_common_factor(&spec.ar, &spec.ma) {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| spec.aic < b.aic) {
                        best = Some(spec);
                    }
                }
            }
        }
    }
    Ok(best.unwrap_or_else(|| fallback_spec(&s, mode)))
}

/// h-step forecasts from the end of `series` under `spec`.
pub fn forecast<T: Scalar>(spec: &ArimaSpec, series: &[T], h: usize) -> Result<ScoreForecast<T>> {
    let s = to_f64(series)?;
    if s.len() <= spec.d {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            min: spec.d + 1,
        });
    }
    let c = if spec.include_drift { spec.drift } else { 0.0 };
    let mut w = difference(&s, spec.d);
    let mut e = css_residuals(&w, &spec.ar, &spec.ma, c);
    let n = w.len();
    for _ in 0..h {
        let k = w.len();
        let mut pred = c;
        for (i, &phi) in spec.ar.iter().enumerate() {
            if k > i {
                pred += phi * (w[k - i - 1] - c);
            }
        }
        for (j, &theta) in spec.ma.iter().enumerate() {
            if k > j {
                pred += theta * e[k - j - 1];
            }
        }
        w.push(pred);
        e.push(0.0);
    }

    // integrate back through each differencing level
    let mut last: Vec<f64> = (0..spec.d)
        .map(|k| *difference(&s, k).last().expect("series longer than d"))
        .collect();
    let mean: Vec<T> = w[n..]
        .iter()
        .map(|&wf| {
            let mut v = wf;
            for k in (0..spec.d).rev() {
                v += last[k];
                last[k] = v;
            }
            T::lit(v)
        })
        .collect();

    let psi = spec.psi_weights(h);
    let mut acc = 0.0;
    let variance = psi
        .iter()
        .map(|p| {
            acc += p * p;
            T::lit(spec.innovation_var * acc)
        })
        .collect();
    Ok(ScoreForecast {
        mean,
        variance,
        spec: spec.clone(),
    })
}

/// [`fit_auto`] then [`forecast`].
pub fn fit_and_forecast<T: Scalar>(series: &[T], mode: ScoreDynamics, h: usize) -> Result<ScoreForecast<T>> {
    let spec = fit_auto(series, mode)?;
    forecast(&spec, series, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, StandardNormal};

    fn spec(p: usize, d: usize, q: usize, ar: Vec<f64>, ma: Vec<f64>, drift: Option<f64>, s2: f64) -> ArimaSpec {
        ArimaSpec {
            p,
            d,
            q,
            include_drift: drift.is_some(),
            ar,
            ma,
            drift: drift.unwrap_or(0.0),
            innovation_var: s2,
            loglik: 0.0,
            aic: 0.0,
            fallback: false,
        }
    }

    #[test]
    fn white_noise_forecast() {
        let series = [1.0, 3.0, 2.0, 2.0, 1.5, 2.5, 2.0, 2.0, 1.0, 3.0];
        let sp = spec(0, 0, 0, vec![], vec![], Some(2.0), 0.4);
        let f = forecast(&sp, &series, 5).unwrap();
        assert!(f.mean.iter().all(|&m| (m - 2.0f64).abs() < 1e-12));
        assert!(f.variance.iter().all(|&v| (v - 0.4f64).abs() < 1e-12));
    }

    #[test]
    fn random_walk_with_drift_forecast() {
        let series: Vec<f64> = (0..12).map(|t| 0.3 * t as f64).collect();
        let sp = spec(0, 1, 0, vec![], vec![], Some(-0.25), 0.7);
        let f = forecast(&sp, &series, 6).unwrap();
        for h in 1..=6 {
            assert!((f.mean[h - 1] - (3.3 - 0.25 * h as f64)).abs() < 1e-12);
            assert!((f.variance[h - 1] - 0.7 * h as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_forecast_closed_form_and_monte_carlo() {
        let series = [0.1, -0.3, 0.2, 0.5, 1.0, 1.4, 0.9, 1.1, 1.5, 2.0];
        let s2 = 0.5;
        let sp = spec(1, 0, 0, vec![0.5], vec![], None, s2);
        let f = forecast(&sp, &series, 8).unwrap();
        for h in 1..=8 {
            let m = 2.0 * 0.5f64.powi(h as i32);
            let v = s2 * (1.0 - 0.25f64.powi(h as i32)) / 0.75;
            assert!((f.mean[h - 1] - m).abs() < 1e-12);
            assert!((f.variance[h - 1] - v).abs() < 1e-12);
        }
        // Monte Carlo cross-check of the h = 3 moments
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let paths = 100_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..paths {
            let mut y = 2.0;
            for _ in 0..3 {
                let e: f64 = StandardNormal.sample(&mut rng);
                y = 0.5 * y + s2.sqrt() * e;
            }
            sum += y;
            sumsq += y * y;
        }
        let mean = sum / paths as f64;
        let var = sumsq / paths as f64 - mean * mean;
        assert!((mean - f.mean[2]).abs() < 0.01);
        assert!((var - f.variance[2]).abs() < 0.01);
    }

    #[test]
    fn psi_weights_of_integrated_ma() {
        // (1 − B) y = (1 + 0.4B) e  =>  ψ = 1, 1.4, 1.4, ...
        let sp = spec(0, 1, 1, vec![], vec![0.4], None, 1.0);
        let psi = sp.psi_weights(4);
        assert_eq!(psi, vec![1.0, 1.4, 1.4, 1.4]);
    }

    #[test]
    fn white_noise_selects_order_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = Normal::new(0.0, 1.0).unwrap();
        let series: Vec<f64> = (0..200).map(|_| n.sample(&mut rng)).collect();
        let sp = fit_auto(&series, ScoreDynamics::Nonstationary).unwrap();
        assert_eq!(sp.order(), (0, 0, 0));
        assert!(sp.process_mean().abs() < 2.0 / (200f64).sqrt());
    }

    #[test]
    fn linear_trend_is_differenced() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = Normal::new(0.0, 0.1).unwrap();
        let series: Vec<f64> = (0..60).map(|t| 0.5 * t as f64 + n.sample(&mut rng)).collect();
        let sp = fit_auto(&series, ScoreDynamics::Nonstationary).unwrap();
        assert!(sp.d >= 1, "{sp:?}");
        let f = forecast(&sp, &series, 20).unwrap();
        let slope = (f.mean[19] - f.mean[0]) / 19.0;
        // OLS oracle for the trend slope
        let tbar = 29.5;
        let ybar = series.iter().sum::<f64>() / 60.0;
        let ols = series.iter().enumerate().map(|(t, y)| (t as f64 - tbar) * (y - ybar)).sum::<f64>()
            / (0..60).map(|t| (t as f64 - tbar).powi(2)).sum::<f64>();
        assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
        assert!((slope - ols).abs() < 0.05);
    }

    #[test]
    fn ar1_is_recovered_in_stationary_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut y = 0.0;
        let series: Vec<f64> = (0..500)
            .map(|_| {
                y = 0.8 * y + n.sample(&mut rng);
                y
            })
            .collect();
        let sp = fit_auto(&series, ScoreDynamics::Stationary).unwrap();
        assert_eq!(sp.d, 0);
        assert!(sp.p >= 1, "{sp:?}");
        assert!((0.65..=0.95).contains(&sp.ar[0]), "{sp:?}");
    }

    #[test]
    fn stationary_forecasts_revert() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut y = 0.0;
        let series: Vec<f64> = (0..60)
            .map(|t| {
                y = 0.9 * y + n.sample(&mut rng);
                y + 0.05 * t as f64
            })
            .collect();
        for mode in [ScoreDynamics::Stationary, ScoreDynamics::StationaryZeroMean] {
            let sp = fit_auto(&series, mode).unwrap();
            assert!(sp.is_stationary(STATIONARY_ROOT_MARGIN));
            let f = forecast(&sp, &series, 200).unwrap();
            let sd = (series.iter().map(|v| v * v).sum::<f64>() / 60.0).sqrt();
            assert!((f.mean[199] - sp.process_mean()).abs() < 1e-3 * sd);
            let uncond = *f.variance.last().unwrap();
            assert!(f.variance.iter().all(|&v| v <= uncond * (1.0 + 1e-6)));
        }
    }

    #[test]
    fn fits_are_reproducible_and_short_series_rejected() {
        let series: Vec<f64> = (0..25).map(|t| (t as f64 * 0.7).sin() + 0.1 * t as f64).collect();
        let a = fit_auto(&series, ScoreDynamics::Nonstationary).unwrap();
        let b = fit_auto(&series, ScoreDynamics::Nonstationary).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            fit_auto(&series[..5], ScoreDynamics::Nonstationary),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn root_checks() {
        assert!(ar_roots_outside(&[0.5], 1.001));
        assert!(!ar_roots_outside(&[1.0], 1.001));
        assert!(ar_roots_outside(&[0.5, 0.3], 1.001));
        assert!(!ar_roots_outside(&[0.5, 0.6], 1.001));
        assert!(!ar_roots_outside(&[0.0, -1.0], 1.001));
        assert!(ar_roots_outside(&[0.9], 1.05));
        assert!(!ar_roots_outside(&[0.97], 1.05));
        assert!(ma_invertible(&[0.4]));
        assert!(!ma_invertible(&[-1.0]));
        // (1 − 0.6B) y = (1 − 0.62B) e cancels; (1 − 0.6B) y = (1 + 0.6B) e does not
        assert!(has_common_factor(&[0.6], &[-0.62]));
        assert!(!has_common_factor(&[0.6], &[0.6]));
        // complex pair 0.5 ± 0.5i on both sides
        assert!(has_common_factor(&[1.0, -0.5], &[-1.0, 0.5]));
        assert!(!has_common_factor(&[], &[0.3]));
    }
}
