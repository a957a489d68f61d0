use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mortfpca::demographics::{e0_path, sex_ratio};
use mortfpca::evaluation::{default_kappa_grid, rolling_rmse, training_end, tune_kappa, EvalReport};
use mortfpca::forecasters::{fit_model, FittedModel, ForecastSurface, ModelKind, MortalityModel};
use mortfpca::hmd::{load_hmd_rates, write_surface_csv, MortalitySurface, SurfaceBundle, SurfaceKind, MAX_AGE};
use mortfpca::linalg::Matrix;
use mortfpca::persist::{append_eval_csv, write_e0_csv, write_forecast_csv, write_model, write_sex_ratio_csv};
use mortfpca::smoothing::{smooth_surface, ResidualField, SmoothConfig};
use mortfpca::synthetic::{to_hmd_text, two_population, SyntheticConfig};
use mortfpca::tsmodels::MIN_SERIES_LEN;

use crate::config::{Kappa, RunConfig};
use crate::data::{country_label, load_bundle, load_sigma, population_ids, OBSERVED, SIGMA, SMOOTHED};
use crate::svg::{line_chart, Series};

pub const DEFAULT_H: usize = 20;
pub const DEFAULT_EVAL_H: [usize; 4] = [1, 5, 10, 20];

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("io: cannot create {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("io: cannot write {}", path.display()))
}

pub fn ingest(cfg: &RunConfig, input: &Path, max_age: u32) -> Result<()> {
    if max_age > MAX_AGE {
        bail!("cli: max-age {max_age} exceeds {MAX_AGE}");
    }
    let text = fs::read_to_string(input).with_context(|| format!("io: cannot read {}", input.display()))?;
    let bundle = load_hmd_rates::<f64>(&text, max_age)?;
    let dir = cfg.data.join(OBSERVED);
    mkdir(&dir)?;
    for s in bundle.surfaces() {
        write_surface_csv(s, dir.join(format!("{}.csv", s.population_id)))?;
    }
    Ok(())
}

pub fn smooth(cfg: &RunConfig) -> Result<()> {
    let ids = population_ids(&cfg.data, OBSERVED, cfg.populations.as_deref())?;
    let observed = load_bundle(&cfg.data, OBSERVED, &ids)?;
    let config = SmoothConfig::default();
    let results = observed
        .surfaces()
        .iter()
        .map(|s| smooth_surface(s, &config))
        .collect::<mortfpca::Result<Vec<_>>>()?;
    let (sm_dir, sig_dir) = (cfg.data.join(SMOOTHED), cfg.data.join(SIGMA));
    mkdir(&sm_dir)?;
    mkdir(&sig_dir)?;
    for (smoothed, field) in &results {
        let id = &smoothed.population_id;
        write_surface_csv(smoothed, sm_dir.join(format!("{id}.csv")))?;
        let sigma = MortalitySurface::new(
            id.clone(),
            smoothed.ages.clone(),
            smoothed.years.clone(),
            field.sigma.clone(),
            SurfaceKind::Smoothed,
        )?;
        write_surface_csv(&sigma, sig_dir.join(format!("{id}.csv")))?;
    }
    Ok(())
}

struct Inputs {
    ids: Vec<String>,
    smoothed: SurfaceBundle<f64>,
    sigma: Option<Vec<ResidualField<f64>>>,
}

fn inputs(cfg: &RunConfig) -> Result<Inputs> {
    let ids = population_ids(&cfg.data, SMOOTHED, cfg.populations.as_deref())?;
    let smoothed = load_bundle(&cfg.data, SMOOTHED, &ids)?;
    let sigma = load_sigma(&cfg.data, &smoothed)?;
    Ok(Inputs { ids, smoothed, sigma })
}

fn observed_for(cfg: &RunConfig, inp: &Inputs) -> Result<SurfaceBundle<f64>> {
    let observed = load_bundle(&cfg.data, OBSERVED, &inp.ids)
        .context("cli: observed surfaces are needed for scoring")?;
    if observed.years() != inp.smoothed.years() || observed.ages() != inp.smoothed.ages() {
        bail!("cli: observed and smoothed surfaces are not aligned");
    }
    Ok(observed)
}

/// κ for one (model, horizon). `auto` tunes on the first `span` years.
fn kappa_for(
    cfg: &RunConfig,
    kind: ModelKind,
    h: usize,
    smoothed: &SurfaceBundle<f64>,
    observed: Option<&SurfaceBundle<f64>>,
    span: usize,
) -> Result<Option<f64>> {
    match cfg.kappa {
        Kappa::Uniform => Ok(None),
        Kappa::Fixed(k) => Ok(Some(k)),
        Kappa::Auto if !kind.is_weighted() => Ok(None),
        Kappa::Auto => {
            let observed = observed.context("cli: kappa auto needs observed surfaces")?;
            let room = (span + 1).saturating_sub(MIN_SERIES_LEN + h);
            let windows = cfg.windows.min(room);
            if windows == 0 {
                bail!("evaluation: insufficient span: {span} training years cannot tune kappa at horizon {h}");
            }
            let fit = smoothed.slice_years(0..span)?;
            let actual = observed.slice_years(0..span)?;
            let search = tune_kappa(&fit, &actual, &cfg.model_config(kind, None), h, windows, &default_kappa_grid())?;
            Ok(Some(search.best))
        }
    }
}

fn fit_one(cfg: &RunConfig, inp: &Inputs, kind: ModelKind, h: usize) -> Result<(FittedModel<f64>, Option<f64>)> {
    let observed = match cfg.kappa {
        Kappa::Auto if kind.is_weighted() => Some(observed_for(cfg, inp)?),
        _ => None,
    };
    let n = inp.smoothed.years().len();
    let kappa = kappa_for(cfg, kind, h, &inp.smoothed, observed.as_ref(), n)?;
    let model = fit_model(&inp.smoothed, inp.sigma.as_deref(), &cfg.model_config(kind, kappa))?;
    Ok((model, kappa))
}

fn run_summary(kind: ModelKind, kappa: Option<f64>, cfg: &RunConfig, ids: &[String]) -> String {
    format!(
        "model = {kind}\nkappa = {}\nvar_threshold = {}\nncomp = {}\nalpha = {}\nweight_power = {}\npopulations = {}\n",
        kappa.map_or_else(|| "uniform".to_string(), |k| k.to_string()),
        cfg.rule.threshold,
        cfg.rule.override_n.map_or_else(|| "auto".to_string(), |n| n.to_string()),
        cfg.alpha,
        cfg.power.as_f64(),
        ids.join(","),
    )
}

pub fn fit(cfg: &RunConfig) -> Result<()> {
    let kind = cfg.model()?;
    let h = cfg.horizon(DEFAULT_H)?;
    let inp = inputs(cfg)?;
    let (model, kappa) = fit_one(cfg, &inp, kind, h)?;
    mkdir(&cfg.out)?;
    write_model(&model, &cfg.out)?;
    write_text(&cfg.out.join(kind.name()).join("run.txt"), &run_summary(kind, kappa, cfg, &inp.ids))
}

fn fan_chart(f: &ForecastSurface<f64>, kind: ModelKind) -> String {
    let h = f.horizon();
    let curve = |m: &Matrix<f64>, s: usize| -> Vec<(f64, f64)> {
        f.ages.iter().enumerate().map(|(j, &a)| (f64::from(a), m[(s, j)])).collect()
    };
    let mut series = vec![Series::new(format!("{}", f.horizon_years[0]), curve(&f.mean, 0))];
    if h > 1 {
        series.push(Series::new(format!("{}", f.horizon_years[h - 1]), curve(&f.mean, h - 1)));
    }
    let pct = 100.0 * (1.0 - f.alpha);
    series.push(Series::new(format!("{pct}% lower {}", f.horizon_years[h - 1]), curve(&f.lower, h - 1)).dashed());
    series.push(Series::new(format!("{pct}% upper {}", f.horizon_years[h - 1]), curve(&f.upper, h - 1)).dashed());
    line_chart(&format!("{} {kind} forecast", f.population_id), "age", "log death rate", &series)
}

pub fn forecast(cfg: &RunConfig) -> Result<()> {
    let kind = cfg.model()?;
    let h = cfg.horizon(DEFAULT_H)?;
    let inp = inputs(cfg)?;
    let (model, kappa) = fit_one(cfg, &inp, kind, h)?;
    let surfaces = model.forecast(h)?;
    mkdir(&cfg.out)?;
    for f in &surfaces {
        let stem = format!("forecast_{kind}_{}", f.population_id);
        write_forecast_csv(f, &cfg.out.join(format!("{stem}.csv")))?;
        if cfg.plot {
            write_text(&cfg.out.join(format!("{stem}.svg")), &fan_chart(f, kind))?;
        }
    }
    write_text(&cfg.out.join(format!("forecast_{kind}.txt")), &run_summary(kind, kappa, cfg, &inp.ids))
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    let models = if cfg.models.is_empty() { ModelKind::ALL.to_vec() } else { cfg.models.clone() };
    let horizons = if cfg.horizons.is_empty() { DEFAULT_EVAL_H.to_vec() } else { cfg.horizons.clone() };
    let inp = inputs(cfg)?;
    let observed = observed_for(cfg, &inp)?;
    let n = inp.smoothed.years().len();
    let country = cfg.country.clone().unwrap_or_else(|| country_label(&inp.ids));
    for &h in &horizons {
        let need = MIN_SERIES_LEN + h + cfg.windows - 1;
        if n < need {
            bail!("evaluation: insufficient span: {n} years cannot hold {} windows at horizon {h}", cfg.windows);
        }
    }
    let mut reports: Vec<EvalReport> = Vec::new();
    for &kind in &models {
        for &h in &horizons {
            let span = training_end(n, h, cfg.windows, 0) + 1;
            let kappa = kappa_for(cfg, kind, h, &inp.smoothed, Some(&observed), span)?;
            let mc = cfg.model_config(kind, kappa);
            reports.push(rolling_rmse(&country, &inp.smoothed, &observed, &mc, h, cfg.windows)?);
        }
    }
    mkdir(&cfg.out)?;
    let path = cfg.out.join("eval.csv");
    if path.exists() {
        fs::remove_file(&path)?;
    }
    append_eval_csv(&path, &reports)?;
    Ok(())
}

fn sex_pair(ids: &[String]) -> Result<(usize, usize)> {
    let m = ids.iter().position(|id| id.ends_with("_male"));
    let f = ids.iter().position(|id| id.ends_with("_female"));
    match (m, f) {
        (Some(m), Some(f)) => Ok((m, f)),
        _ => bail!("cli: diagnose needs a <label>_male and <label>_female population"),
    }
}

pub fn diagnose(cfg: &RunConfig) -> Result<()> {
    let inp = inputs(cfg)?;
    let (mi, fi) = sex_pair(&inp.ids)?;
    let male = &inp.smoothed.surfaces()[mi];
    let female = &inp.smoothed.surfaces()[fi];
    let mut years = male.years.clone();
    let mut m_rates = male.log_rates.clone();
    let mut f_rates = female.log_rates.clone();
    let mut title = "smoothed".to_string();

    if !cfg.models.is_empty() {
        let kind = cfg.model()?;
        let h = cfg.horizon(DEFAULT_H)?;
        let (model, _) = fit_one(cfg, &inp, kind, h)?;
        let f = model.forecast(h)?;
        years.extend(&f[mi].horizon_years);
        let stack = |a: &Matrix<f64>, b: &Matrix<f64>| {
            let rows: Vec<&[f64]> = a.iter_rows().chain(b.iter_rows()).collect();
            Matrix::from_rows(&rows)
        };
        m_rates = stack(&m_rates, &f[mi].mean);
        f_rates = stack(&f_rates, &f[fi].mean);
        title = format!("smoothed + {kind} forecast");
    }

    let e0_m = e0_path(&m_rates)?;
    let e0_f = e0_path(&f_rates)?;
    let ratio = sex_ratio(&m_rates, &f_rates)?;
    mkdir(&cfg.out)?;
    write_e0_csv(&cfg.out.join("e0.csv"), &years, &e0_m, &e0_f)?;
    write_sex_ratio_csv(&cfg.out.join("sex_ratio.csv"), &years, &male.ages, &ratio)?;
    if cfg.plot {
        let pts = |v: &[f64]| years.iter().zip(v).map(|(&y, &e)| (f64::from(y), e)).collect::<Vec<_>>();
        let chart = line_chart(
            &format!("life expectancy at birth ({title})"),
            "year",
            "e0",
            &[Series::new(&inp.ids[mi], pts(&e0_m)), Series::new(&inp.ids[fi], pts(&e0_f))],
        );
        write_text(&cfg.out.join("e0.svg"), &chart)?;
        let last = years.len() - 1;
        let by_age = |t: usize| -> Vec<(f64, f64)> {
            male.ages.iter().enumerate().map(|(j, &a)| (f64::from(a), ratio[(t, j)])).collect()
        };
        let chart = line_chart(
            &format!("male/female death-rate ratio ({title})"),
            "age",
            "sex ratio",
            &[
                Series::new(years[0].to_string(), by_age(0)),
                Series::new(years[last].to_string(), by_age(last)),
            ],
        );
        write_text(&cfg.out.join("sex_ratio.svg"), &chart)?;
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, years: usize, divergence: f64, label: &str) -> Result<PathBuf> {
    if years < 2 {
        bail!("cli: simulate needs at least 2 years");
    }
    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric()) {
        bail!("cli: label must be non-empty ASCII alphanumeric");
    }
    let syn = SyntheticConfig {
        label: label.into(),
        n_years: years,
        divergence,
        seed: cfg.seed,
        ..Default::default()
    };
    let pair = two_population::<f64>(&syn)?;
    let text = to_hmd_text(&pair.observed, &format!("{label}, Death rates (period 1x1), synthetic seed {}", cfg.seed));
    mkdir(&cfg.out)?;
    let path = cfg.out.join(format!("{label}_Mx_1x1.txt"));
    write_text(&path, &text)?;
    Ok(path)
}
