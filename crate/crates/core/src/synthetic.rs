//! Seeded synthetic mortality data: Lee–Carter style log-rate surfaces for
//! two related populations, plus an HMD-format text writer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::hmd::{MortalitySurface, SurfaceBundle, SurfaceKind};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub label: String,
    pub first_year: i32,
    pub n_years: usize,
    pub max_age: u32,
    /// Per-year drift of the common mortality index.
    pub drift: f64,
    /// Extra drift of the second population's index. Zero keeps the pair
    /// coherent; non-zero makes it diverge.
    pub divergence: f64,
    /// Innovation sd of the common index.
    pub index_sd: f64,
    /// Innovation sd of the AR(1) sex-gap index.
    pub gap_sd: f64,
    /// Observation noise sd on the log scale, before age scaling.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            label: "SYN".into(),
            first_year: 1947,
            n_years: 50,
            max_age: 100,
            drift: -1.0,
            divergence: 0.0,
            index_sd: 0.6,
            gap_sd: 0.15,
            noise_sd: 0.05,
            seed: 1,
        }
    }
}

/// Smooth truth and noisy observations for the pair `(male, female)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair<T> {
    pub truth: SurfaceBundle<T>,
    pub observed: SurfaceBundle<T>,
}

fn base_log_rate(x: f64, female: bool) -> f64 {
    let infant = 0.03 * (-1.2 * x).exp();
    let accident = if female { 0.0 } else { 0.0008 * (-((x - 22.0) / 8.0).powi(2)).exp() };
    let senescent = if female { 0.000012 } else { 0.00002 } * (0.1 * x).exp();
    (0.0002 + infant + accident + senescent).ln()
}

/// Age loading of the common index: strongest improvement at young ages.
fn loading(x: f64, max_age: f64) -> f64 {
    0.012 * (1.0 + 1.5 * (-x / 15.0).exp()) * (1.0 - 0.5 * x / max_age)
}

fn gap_loading(x: f64) -> f64 {
    0.01 * (-((x - 60.0) / 25.0).powi(2)).exp()
}

fn noise_scale(x: f64, max_age: f64) -> f64 {
    1.0 + 2.0 * (-x / 5.0).exp() + 1.5 * (x / max_age).powi(4)
}

/// Two populations sharing a random-walk mortality index, with a stationary
/// AR(1) gap index and optional diverging drift.
pub fn two_population<T: Scalar>(cfg: &SyntheticConfig) -> Result<SyntheticPair<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let ages: Vec<u32> = (0..=cfg.max_age).collect();
    let years: Vec<i32> = (0..cfg.n_years as i32).map(|t| cfg.first_year + t).collect();
    let max_age = f64::from(cfg.max_age.max(1));

    let mut k = 0.0;
    let mut gap = 0.0;
    let mut index = Vec::with_capacity(cfg.n_years);
    for _ in 0..cfg.n_years {
        k += cfg.drift + cfg.index_sd * std.sample(&mut rng);
        gap = 0.7 * gap + cfg.gap_sd * std.sample(&mut rng);
        index.push((k, gap));
    }

    let mut truth = Vec::with_capacity(2);
    let mut observed = Vec::with_capacity(2);
    for (pop, (name, female)) in [("male", false), ("female", true)].into_iter().enumerate() {
        let sign = if female { -1.0 } else { 1.0 };
        let clean = Matrix::from_fn(cfg.n_years, ages.len(), |t, j| {
            let x = f64::from(ages[j]);
            let (k, g) = index[t];
            let extra = if pop == 1 { cfg.divergence * t as f64 } else { 0.0 };
            base_log_rate(x, female) + loading(x, max_age) * (k + extra) + sign * gap_loading(x) * g
        });
        let noisy = Matrix::from_fn(cfg.n_years, ages.len(), |t, j| {
            clean[(t, j)] + cfg.noise_sd * noise_scale(f64::from(ages[j]), max_age) * std.sample(&mut rng)
        });
        let id = format!("{}_{name}", cfg.label);
        let to_t = |m: &Matrix<f64>| Matrix::from_fn(m.rows(), m.cols(), |t, j| T::lit(m[(t, j)]));
        truth.push(MortalitySurface::new(
            id.clone(),
            ages.clone(),
            years.clone(),
            to_t(&clean),
            SurfaceKind::Smoothed,
        )?);
        observed.push(MortalitySurface::new(
            id,
            ages.clone(),
            years.clone(),
            to_t(&noisy),
            SurfaceKind::Observed,
        )?);
    }
    Ok(SyntheticPair {
        truth: SurfaceBundle::new(truth)?,
        observed: SurfaceBundle::new(observed)?,
    })
}

/// Renders a `(male, female)` bundle as an HMD `Mx_1x1` table. The total
/// column is the average of the two rates.
pub fn to_hmd_text<T: Scalar>(bundle: &SurfaceBundle<T>, title: &str) -> String {
    let male = &bundle.surfaces()[0];
    let female = &bundle.surfaces()[1];
    let mut out = format!("{title}\n\n  Year      Age        Female      Male      Total\n\n");
    for (t, year) in male.years.iter().enumerate() {
        for (j, age) in male.ages.iter().enumerate() {
            let m = male.log_rates[(t, j)].as_f64().exp();
            let f = female.log_rates[(t, j)].as_f64().exp();
            out.push_str(&format!(
                "  {year:<9} {age:<8} {f:.6e}  {m:.6e}  {:.6e}\n",
                0.5 * (m + f)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmd::parse_hmd_rates;

    #[test]
    fn generation_is_seeded() {
        let cfg = SyntheticConfig::default();
        let a = two_population::<f64>(&cfg).unwrap();
        let b = two_population::<f64>(&cfg).unwrap();
        assert_eq!(a, b);
        let c = two_population::<f64>(&SyntheticConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a.observed, c.observed);
    }

    #[test]
    fn rates_are_plausible() {
        let pair = two_population::<f64>(&SyntheticConfig::default()).unwrap();
        let male = &pair.truth.surfaces()[0];
        let female = &pair.truth.surfaces()[1];
        assert_eq!(male.log_rates.shape(), (50, 101));
        for t in 0..50 {
            let m = male.log_rates.row(t);
            assert!(m.iter().all(|v| (-12.0..0.5).contains(v)));
            assert!(m[100] > m[40]);
            assert!(female.log_rates[(t, 70)] < m[70]);
        }
        // improvement over time
        assert!(male.log_rates[(49, 30)] < male.log_rates[(0, 30)]);
    }

    #[test]
    fn hmd_text_round_trips_through_the_parser() {
        let cfg = SyntheticConfig {
            n_years: 3,
            max_age: 10,
            ..Default::default()
        };
        let pair = two_population::<f64>(&cfg).unwrap();
        let text = to_hmd_text(&pair.observed, "Synthetic, Death rates (period 1x1)");
        let parsed = parse_hmd_rates::<f64>(&text, 10).unwrap();
        let male = parsed.get("Synthetic_male").unwrap();
        let diff = male.log_rates.max_abs_diff(&pair.observed.surfaces()[0].log_rates);
        assert!(diff < 1e-6, "{diff}");
    }
}
