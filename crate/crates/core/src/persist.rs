//! CSV persistence for fits, time-series specs, forecasts and diagnostics.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::EvalReport;
use crate::forecasters::{FittedModel, ForecastSurface, ModelContext};
use crate::hmd::fmt_value;
use crate::linalg::Matrix;
use crate::mfpca::MfpcaFit;
use crate::scalar::Scalar;
use crate::tsmodels::ArimaSpec;
use crate::ufpca::FpcaFit;

pub const FORECAST_HEADER: [&str; 6] = ["year", "age", "mean", "variance", "lower", "upper"];
pub const EVAL_HEADER: [&str; 8] = ["country", "model", "h", "pop", "rmse", "avg_rmse", "windows", "kappa"];
pub const ARIMA_HEADER: [&str; 12] = [
    "series", "p", "d", "q", "drift_flag", "drift", "ar_1", "ar_2", "ma_1", "ma_2", "sigma2", "aic",
];

fn write_rows<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}_{k}")).collect()
}

/// `age` followed by one column per row of `basis`.
fn write_age_table<T: Scalar>(path: &Path, ages: &[u32], prefix: &str, basis: &Matrix<T>) -> Result<()> {
    let mut header = vec!["age".to_string()];
    header.extend(numbered(prefix, basis.rows()));
    let rows = ages.iter().enumerate().map(|(j, a)| {
        let mut r = vec![a.to_string()];
        r.extend((0..basis.rows()).map(|n| fmt_value(basis[(n, j)])));
        r
    });
    write_rows(path, &header, rows)
}

fn write_mean<T: Scalar>(path: &Path, ages: &[u32], mean: &[T]) -> Result<()> {
    let rows = ages.iter().zip(mean).map(|(a, &m)| vec![a.to_string(), fmt_value(m)]);
    write_rows(path, &strings(&["age", "mean"]), rows)
}

fn write_scores<T: Scalar>(path: &Path, years: &[i32], scores: &Matrix<T>) -> Result<()> {
    let mut header = vec!["year".to_string()];
    header.extend(numbered("score", scores.cols()));
    let rows = years.iter().enumerate().map(|(t, y)| {
        let mut r = vec![y.to_string()];
        r.extend(scores.row(t).iter().map(|&v| fmt_value(v)));
        r
    });
    write_rows(path, &header, rows)
}

fn write_eigenvalues<T: Scalar>(path: &Path, values: &[T], shares: &[T]) -> Result<()> {
    let rows = values
        .iter()
        .zip(shares)
        .enumerate()
        .map(|(n, (&v, &s))| vec![(n + 1).to_string(), fmt_value(v), fmt_value(s)]);
    write_rows(path, &strings(&["component", "eigenvalue", "var_explained"]), rows)
}

/// `mean.csv`, `eigenfunctions.csv`, `scores.csv` and `eigenvalues.csv` in `dir`.
pub fn write_fpca_fit<T: Scalar>(fit: &FpcaFit<T>, ages: &[u32], years: &[i32], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_mean(&dir.join("mean.csv"), ages, &fit.mean_fn)?;
    write_age_table(&dir.join("eigenfunctions.csv"), ages, "phi", &fit.eigenfunctions)?;
    write_scores(&dir.join("scores.csv"), years, &fit.scores)?;
    write_eigenvalues(&dir.join("eigenvalues.csv"), &fit.eigenvalues, &fit.var_explained)
}

/// Per-population `<id>/mean.csv` and `<id>/eigenfunctions.csv` (the
/// multivariate eigenfunctions), plus joint `scores.csv` and `eigenvalues.csv`.
pub fn write_mfpca_fit<T: Scalar>(
    fit: &MfpcaFit<T>,
    population_ids: &[String],
    ages: &[u32],
    years: &[i32],
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, id) in population_ids.iter().enumerate() {
        let sub = dir.join(id);
        fs::create_dir_all(&sub)?;
        write_mean(&sub.join("mean.csv"), ages, fit.mean_fn(i))?;
        write_age_table(&sub.join("eigenfunctions.csv"), ages, "psi", &fit.multi_eigenfunctions[i])?;
    }
    write_scores(&dir.join("scores.csv"), years, &fit.shared_scores)?;
    write_eigenvalues(&dir.join("eigenvalues.csv"), &fit.joint_eigenvalues, &fit.var_explained)
}

fn coef(xs: &[f64], k: usize) -> String {
    xs.get(k).map_or_else(String::new, |&v| fmt_value(v))
}

/// One row per named spec.
pub fn write_arima_specs(path: &Path, specs: &[(String, &ArimaSpec)]) -> Result<()> {
    let rows = specs.iter().map(|(name, s)| {
        vec![
            name.clone(),
            s.p.to_string(),
            s.d.to_string(),
            s.q.to_string(),
            u8::from(s.include_drift).to_string(),
            fmt_value(s.drift),
            coef(&s.ar, 0),
            coef(&s.ar, 1),
            coef(&s.ma, 0),
            coef(&s.ma, 1),
            fmt_value(s.innovation_var),
            fmt_value(s.aic),
        ]
    });
    write_rows(path, &strings(&ARIMA_HEADER), rows)
}

fn named<'a>(prefix: &str, specs: &'a [ArimaSpec]) -> Vec<(String, &'a ArimaSpec)> {
    specs
        .iter()
        .enumerate()
        .map(|(n, s)| (format!("{prefix}score_{}", n + 1), s))
        .collect()
}

/// Writes a fitted model under `dir/<model name>/`.
pub fn write_model<T: Scalar>(model: &FittedModel<T>, dir: &Path) -> Result<()> {
    let ctx: &ModelContext<T> = match model {
        FittedModel::Independent(m) => &m.context,
        FittedModel::Wmfpca(m) => &m.context,
        FittedModel::Coherent(m) => &m.context,
        FittedModel::ProductRatio(m) => &m.context,
    };
    let (ages, years, ids) = (&ctx.ages, &ctx.years, &ctx.population_ids);
    let root = match model {
        FittedModel::Independent(_) => dir.join("independent"),
        FittedModel::Wmfpca(_) => dir.join("wmfpca"),
        FittedModel::Coherent(_) => dir.join("coherent"),
        FittedModel::ProductRatio(_) => dir.join("product_ratio"),
    };
    fs::create_dir_all(&root)?;
    let mut specs: Vec<(String, &ArimaSpec)> = Vec::new();
    match model {
        FittedModel::Independent(m) => {
            for (i, id) in ids.iter().enumerate() {
                write_fpca_fit(&m.fits[i], ages, years, &root.join(id))?;
                specs.extend(named(&format!("{id}/"), &m.specs[i]));
            }
        }
        FittedModel::Wmfpca(m) => {
            write_mfpca_fit(&m.fit, ids, ages, years, &root)?;
            specs.extend(named("", &m.specs));
        }
        FittedModel::Coherent(m) => {
            write_fpca_fit(&m.fit.common_fit, ages, years, &root.join("common"))?;
            write_mfpca_fit(&m.fit.deviation_fit, ids, ages, years, &root.join("deviation"))?;
            specs.extend(named("common/", &m.common_specs));
            specs.extend(named("deviation/", &m.deviation_specs));
        }
        FittedModel::ProductRatio(m) => {
            write_fpca_fit(&m.product, ages, years, &root.join("product"))?;
            specs.extend(named("product/", &m.product_specs));
            for (i, id) in ids.iter().enumerate() {
                let name = format!("ratio_{id}");
                write_fpca_fit(&m.ratios[i], ages, years, &root.join(&name))?;
                specs.extend(named(&format!("{name}/"), &m.ratio_specs[i]));
            }
        }
    }
    write_arima_specs(&root.join("arima.csv"), &specs)
}

/// `year,age,mean,variance,lower,upper` in year-major order.
pub fn write_forecast_csv<T: Scalar>(surface: &ForecastSurface<T>, path: &Path) -> Result<()> {
    let rows = surface.horizon_years.iter().enumerate().flat_map(|(s, y)| {
        surface.ages.iter().enumerate().map(move |(j, a)| {
            vec![
                y.to_string(),
                a.to_string(),
                fmt_value(surface.mean[(s, j)]),
                fmt_value(surface.variance[(s, j)]),
                fmt_value(surface.lower[(s, j)]),
                fmt_value(surface.upper[(s, j)]),
            ]
        })
    });
    write_rows(path, &strings(&FORECAST_HEADER), rows)
}

/// `year,e0_male,e0_female`.
pub fn write_e0_csv(path: &Path, years: &[i32], male: &[f64], female: &[f64]) -> Result<()> {
    let rows = years
        .iter()
        .zip(male.iter().zip(female))
        .map(|(y, (&m, &f))| vec![y.to_string(), fmt_value(m), fmt_value(f)]);
    write_rows(path, &strings(&["year", "e0_male", "e0_female"]), rows)
}

/// `year,age,sex_ratio` in year-major order.
pub fn write_sex_ratio_csv<T: Scalar>(path: &Path, years: &[i32], ages: &[u32], ratio: &Matrix<T>) -> Result<()> {
    let rows = years.iter().enumerate().flat_map(|(t, y)| {
        ages.iter()
            .enumerate()
            .map(move |(j, a)| vec![y.to_string(), a.to_string(), fmt_value(ratio[(t, j)])])
    });
    write_rows(path, &strings(&["year", "age", "sex_ratio"]), rows)
}

fn eval_rows(report: &EvalReport) -> Vec<Vec<String>> {
    let kappa = report.kappa.map_or_else(String::new, |k| format!("{k}"));
    report
        .population_ids
        .iter()
        .zip(&report.rmse)
        .map(|(pop, &r)| {
            vec![
                report.country.clone(),
                report.model.to_string(),
                report.h.to_string(),
                pop.clone(),
                fmt_value(r),
                fmt_value(report.avg_rmse),
                report.windows.to_string(),
                kappa.clone(),
            ]
        })
        .collect()
}

/// Appends report rows to `eval.csv`, writing the header when the file is new.
pub fn append_eval_csv(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    if fresh {
        w.write_record(EVAL_HEADER)?;
    }
    for r in reports {
        for row in eval_rows(r) {
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::ComponentRule;
    use crate::forecasters::{fit_model, ModelConfig, ModelKind, MortalityModel};
    use crate::synthetic::{two_population, SyntheticConfig};

    fn read(path: &Path) -> Vec<Vec<String>> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
        r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
    }

    #[test]
    fn model_trees_and_forecasts() {
        let dir = tempfile::tempdir().unwrap();
        let pair = two_population::<f64>(&SyntheticConfig {
            n_years: 20,
            max_age: 10,
            ..Default::default()
        })
        .unwrap();
        for kind in ModelKind::ALL {
            let cfg = ModelConfig::new(kind).with_kappa(0.2).with_rule(ComponentRule::fixed(2));
            let model = fit_model(&pair.truth, None, &cfg).unwrap();
            write_model(&model, dir.path()).unwrap();
            let arima = read(&dir.path().join(kind.name()).join("arima.csv"));
            assert_eq!(arima[0], strings(&ARIMA_HEADER));
            assert!(arima.len() > 1);
            assert!(arima[1..].iter().all(|r| r.len() == 12));
        }
        let ind = dir.path().join("independent/SYN_male");
        let eig = read(&ind.join("eigenfunctions.csv"));
        assert_eq!(eig[0], strings(&["age", "phi_1", "phi_2"]));
        assert_eq!(eig.len(), 12);
        let scores = read(&ind.join("scores.csv"));
        assert_eq!(scores[1][0], "1947");
        assert_eq!(read(&ind.join("mean.csv"))[0], strings(&["age", "mean"]));
        assert!(dir.path().join("coherent/deviation/SYN_female/eigenfunctions.csv").exists());
        assert!(dir.path().join("product_ratio/ratio_SYN_male/scores.csv").exists());
        assert!(dir.path().join("wmfpca/eigenvalues.csv").exists());

        let model = fit_model(&pair.truth, None, &ModelConfig::new(ModelKind::Independent)).unwrap();
        let f = &model.forecast(3).unwrap()[0];
        let path = dir.path().join("f.csv");
        write_forecast_csv(f, &path).unwrap();
        let rows = read(&path);
        assert_eq!(rows[0], strings(&FORECAST_HEADER));
        assert_eq!(rows.len(), 1 + 3 * 11);
        assert_eq!(rows[1][0], "1967");
        assert_eq!(rows[12][..2], strings(&["1968", "0"]));
        let mean: f64 = rows[1][2].parse().unwrap();
        assert_eq!(mean, f.mean[(0, 0)]);
    }

    #[test]
    fn eval_rows_append() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eval.csv");
        let report = EvalReport {
            country: "JPN".into(),
            model: ModelKind::Coherent,
            h: 20,
            population_ids: vec!["m".into(), "f".into()],
            rmse: vec![0.2, 0.4],
            avg_rmse: 0.3,
            windows: 10,
            kappa: Some(0.25),
        };
        append_eval_csv(&path, std::slice::from_ref(&report)).unwrap();
        append_eval_csv(&path, &[report]).unwrap();
        let rows = read(&path);
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0], strings(&EVAL_HEADER));
        assert_eq!(rows[2][..4], strings(&["JPN", "coherent", "20", "f"]));
        assert_eq!(rows[2][7], "0.25");
    }
}
