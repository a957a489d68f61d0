//! Human Mortality Database period rate tables and the canonical surface CSV.
//!
//! An HMD `Mx_1x1` file is a whitespace-delimited table with a title line,
//! a `Year Age Female Male Total` header and one row per (year, age). Rates
//! are turned into natural-log surfaces, one per sex column. Missing cells
//! (`.`) and zero rates become `NaN` sentinels which [`impute_missing`]
//! fills in along age.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Oldest single-year age kept in a surface.
pub const MAX_AGE: u32 = 100;

const HMD_COLUMNS: [&str; 5] = ["Year", "Age", "Female", "Male", "Total"];
const SEXES: [&str; 3] = ["female", "male", "total"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Observed,
    Smoothed,
}

/// One subpopulation's year × age grid of log central death rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalitySurface<T> {
    pub population_id: String,
    pub ages: Vec<u32>,
    pub years: Vec<i32>,
    /// `years.len()` rows by `ages.len()` columns.
    pub log_rates: Matrix<T>,
    pub kind: SurfaceKind,
}

fn check_contiguous<I: Copy + Into<i64>>(xs: &[I], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidSurface(format!("no {what}")));
    }
    for w in xs.windows(2) {
        if w[1].into() != w[0].into() + 1 {
            let msg = format!("{what} {} followed by {}", w[0].into(), w[1].into());
            return Err(if what == "years" {
                Error::NonContiguousYears(msg)
            } else {
                Error::InvalidSurface(msg)
            });
        }
    }
    Ok(())
}

impl<T: Scalar> MortalitySurface<T> {
    /// Validates grid shape and contiguity. Entries may still hold `NaN`
    /// sentinels; see [`MortalitySurface::is_complete`].
    pub fn new(
        population_id: impl Into<String>,
        ages: Vec<u32>,
        years: Vec<i32>,
        log_rates: Matrix<T>,
        kind: SurfaceKind,
    ) -> Result<Self> {
        check_contiguous(&ages, "ages")?;
        check_contiguous(&years, "years")?;
        if *ages.last().unwrap() > MAX_AGE {
            return Err(Error::InvalidSurface(format!(
                "max age {} exceeds {MAX_AGE}",
                ages.last().unwrap()
            )));
        }
        if log_rates.shape() != (years.len(), ages.len()) {
            return Err(Error::InvalidSurface(format!(
                "rates are {:?}, expected {}x{}",
                log_rates.shape(),
                years.len(),
                ages.len()
            )));
        }
        Ok(Self {
            population_id: population_id.into(),
            ages,
            years,
            log_rates,
            kind,
        })
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn n_ages(&self) -> usize {
        self.ages.len()
    }

    /// True when every entry is finite.
    pub fn is_complete(&self) -> bool {
        self.log_rates.all_finite()
    }

    pub fn row_for_year(&self, year: i32) -> Option<&[T]> {
        let first = *self.years.first()?;
        let idx = usize::try_from(year - first).ok()?;
        (idx < self.years.len()).then(|| self.log_rates.row(idx))
    }

    /// Sub-surface for year indices `range`.
    pub fn slice_years(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.years.len() {
            return Err(Error::IndexOutOfRange {
                module: "hmd_ingest",
                index: range.end,
                len: self.years.len(),
            });
        }
        let rows: Vec<&[T]> = range.clone().map(|i| self.log_rates.row(i)).collect();
        Ok(Self {
            population_id: self.population_id.clone(),
            ages: self.ages.clone(),
            years: self.years[range].to_vec(),
            log_rates: Matrix::from_rows(&rows),
            kind: self.kind,
        })
    }
}

/// Aligned surfaces for the subpopulations of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceBundle<T> {
    surfaces: Vec<MortalitySurface<T>>,
}

impl<T: Scalar> SurfaceBundle<T> {
    pub fn new(surfaces: Vec<MortalitySurface<T>>) -> Result<Self> {
        let first = surfaces.first().ok_or(Error::EmptyBundle)?;
        for s in &surfaces[1..] {
            if s.ages != first.ages || s.years != first.years {
                return Err(Error::ShapeMismatch {
                    module: "hmd_ingest",
                    reason: format!(
                        "{} is not aligned with {}",
                        s.population_id, first.population_id
                    ),
                });
            }
        }
        for (i, s) in surfaces.iter().enumerate() {
            if surfaces[..i].iter().any(|o| o.population_id == s.population_id) {
                return Err(Error::InvalidSurface(format!(
                    "duplicate population id {}",
                    s.population_id
                )));
            }
        }
        Ok(Self { surfaces })
    }

    pub fn surfaces(&self) -> &[MortalitySurface<T>] {
        &self.surfaces
    }

    pub fn into_surfaces(self) -> Vec<MortalitySurface<T>> {
        self.surfaces
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn ages(&self) -> &[u32] {
        &self.surfaces[0].ages
    }

    pub fn years(&self) -> &[i32] {
        &self.surfaces[0].years
    }

    pub fn get(&self, population_id: &str) -> Option<&MortalitySurface<T>> {
        self.surfaces.iter().find(|s| s.population_id == population_id)
    }

    /// The surfaces whose ids are listed, in the listed order.
    pub fn select(&self, ids: &[&str]) -> Result<Self> {
        let picked = ids
            .iter()
            .map(|id| {
                self.get(id).cloned().ok_or_else(|| {
                    Error::InvalidSurface(format!("population {id} not in bundle"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(picked)
    }

    pub fn slice_years(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let surfaces = self
            .surfaces
            .iter()
            .map(|s| s.slice_years(range.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { surfaces })
    }

    pub fn curves(&self) -> Vec<&Matrix<T>> {
        self.surfaces.iter().map(|s| &s.log_rates).collect()
    }

    pub fn ensure_complete(&self, module: &'static str) -> Result<()> {
        if self.surfaces.iter().all(MortalitySurface::is_complete) {
            Ok(())
        } else {
            Err(Error::NonFiniteInput(module))
        }
    }
}

fn parse_rate(token: &str, line: usize) -> Result<f64> {
    if token == "." {
        return Ok(f64::NAN);
    }
    let v: f64 = token.parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("bad rate {token:?}"),
    })?;
    if v < 0.0 || !v.is_finite() {
        return Err(Error::MalformedRow {
            line,
            reason: format!("rate {token} is not a non-negative number"),
        });
    }
    // log(0) is unusable; zero cells are imputed like missing ones.
    Ok(if v == 0.0 { f64::NAN } else { v.ln() })
}

fn parse_age(token: &str, line: usize) -> Result<u32> {
    token
        .trim_end_matches('+')
        .parse()
        .map_err(|_| Error::MalformedRow {
            line,
            reason: format!("bad age {token:?}"),
        })
}

fn label_from_title(title: &str) -> String {
    let head = title.split(',').next().unwrap_or("").trim();
    let label: String = head
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect();
    if label.is_empty() {
        "pop".to_string()
    } else {
        label
    }
}

/// Parses an HMD `Mx_1x1` table into female, male and total log-rate
/// surfaces truncated to ages `0..=max_age`.
///
/// Population ids are `<label>_female`, `<label>_male` and `<label>_total`
/// where the label is the title text before its first comma. Missing and
/// zero cells are left as `NaN`.
pub fn parse_hmd_rates<T: Scalar>(raw_text: &str, max_age: u32) -> Result<SurfaceBundle<T>> {
    if !(1..=MAX_AGE).contains(&max_age) {
        return Err(Error::InvalidConfig {
            module: "hmd_ingest",
            reason: format!("max_age {max_age} outside 1..={MAX_AGE}"),
        });
    }
    let mut lines = raw_text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, title) = lines.next().ok_or(Error::EmptyInput)?;
    let label = label_from_title(title);
    let (header_line, header) = lines.next().ok_or(Error::EmptyInput)?;
    let cols: Vec<&str> = header.split_whitespace().collect();
    if cols != HMD_COLUMNS {
        return Err(Error::SchemaMismatch(format!(
            "line {}: expected header {:?}, found {:?}",
            header_line + 1,
            HMD_COLUMNS,
            cols
        )));
    }

    // year -> age -> [female, male, total]
    let mut cells: BTreeMap<i32, BTreeMap<u32, [f64; 3]>> = BTreeMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != HMD_COLUMNS.len() {
            return Err(Error::MalformedRow {
                line: lineno,
                reason: format!("expected {} columns, found {}", HMD_COLUMNS.len(), tokens.len()),
            });
        }
        let year: i32 = tokens[0].parse().map_err(|_| Error::MalformedRow {
            line: lineno,
            reason: format!("bad year {:?}", tokens[0]),
        })?;
        let age = parse_age(tokens[1], lineno)?;
        let rates = [
            parse_rate(tokens[2], lineno)?,
            parse_rate(tokens[3], lineno)?,
            parse_rate(tokens[4], lineno)?,
        ];
        if age > max_age {
            continue;
        }
        if cells.entry(year).or_default().insert(age, rates).is_some() {
            return Err(Error::MalformedRow {
                line: lineno,
                reason: format!("duplicate entry for year {year}, age {age}"),
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }

    let years: Vec<i32> = cells.keys().copied().collect();
    check_contiguous(&years, "years")?;
    let ages: Vec<u32> = (0..=max_age).collect();
    for (year, by_age) in &cells {
        if by_age.len() != ages.len() {
            return Err(Error::SchemaMismatch(format!(
                "year {year} has {} ages in 0..={max_age}, expected {}",
                by_age.len(),
                ages.len()
            )));
        }
    }

    let surfaces = (0..SEXES.len())
        .map(|k| {
            let rows: Vec<Vec<T>> = cells
                .values()
                .map(|by_age| by_age.values().map(|r| T::lit(r[k])).collect())
                .collect();
            MortalitySurface::new(
                format!("{label}_{}", SEXES[k]),
                ages.clone(),
                years.clone(),
                Matrix::from_rows(&rows),
                SurfaceKind::Observed,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SurfaceBundle::new(surfaces)
}

/// Replaces non-finite entries by linear interpolation along age within the
/// same year. Gaps at either end take the nearest finite value.
pub fn impute_missing<T: Scalar>(surface: &MortalitySurface<T>) -> Result<MortalitySurface<T>> {
    let mut out = surface.clone();
    for (t, &year) in surface.years.iter().enumerate() {
        let row = out.log_rates.row_mut(t);
        let known: Vec<usize> = (0..row.len()).filter(|&j| row[j].is_finite()).collect();
        let (&first, &last) = match (known.first(), known.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::AllMissingYear(year)),
        };
        if known.len() == row.len() {
            continue;
        }
        for j in 0..first {
            row[j] = row[first];
        }
        for j in last + 1..row.len() {
            row[j] = row[last];
        }
        for w in known.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 2 {
                continue;
            }
            let (ya, yb) = (row[a], row[b]);
            let span = T::from_count(b - a);
            for j in a + 1..b {
                let frac = T::from_count(j - a) / span;
                row[j] = ya + (yb - ya) * frac;
            }
        }
    }
    Ok(out)
}

/// [`parse_hmd_rates`] followed by [`impute_missing`] on every surface.
pub fn load_hmd_rates<T: Scalar>(raw_text: &str, max_age: u32) -> Result<SurfaceBundle<T>> {
    let bundle = parse_hmd_rates::<T>(raw_text, max_age)?;
    let filled = bundle
        .surfaces()
        .iter()
        .map(impute_missing)
        .collect::<Result<Vec<_>>>()?;
    SurfaceBundle::new(filled)
}

pub const SURFACE_HEADER: [&str; 3] = ["year", "age", "log_rate"];

/// Formats a value with 17 significant digits, enough to round-trip `f64`.
pub fn fmt_value<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

/// Writes `year,age,log_rate` rows in year-major order.
pub fn write_surface_csv<T: Scalar>(surface: &MortalitySurface<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::Writer::from_writer(file);
    w.write_record(SURFACE_HEADER)?;
    for (t, year) in surface.years.iter().enumerate() {
        let row = surface.log_rates.row(t);
        for (j, age) in surface.ages.iter().enumerate() {
            w.write_record([year.to_string(), age.to_string(), fmt_value(row[j])])?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::Io(e.into_error()))?
        .flush()?;
    Ok(())
}

/// Reads a surface written by [`write_surface_csv`]. The population id is the
/// file stem; rows must be in year-major, age-ascending order on a complete
/// contiguous grid.
pub fn read_surface_csv<T: Scalar>(path: impl AsRef<Path>, kind: SurfaceKind) -> Result<MortalitySurface<T>> {
    let path = path.as_ref();
    let population_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::SchemaMismatch(format!("cannot derive population id from {}", path.display())))?
        .to_string();
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != SURFACE_HEADER {
        return Err(Error::SchemaMismatch(format!("header {header:?}")));
    }

    let mut years: Vec<i32> = Vec::new();
    let mut ages: Vec<u32> = Vec::new();
    let mut values: Vec<T> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::SchemaMismatch(format!("line {line}: {} fields", rec.len())));
        }
        let bad = |what: &str| Error::SchemaMismatch(format!("line {line}: bad {what}"));
        let year: i32 = rec[0].trim().parse().map_err(|_| bad("year"))?;
        let age: u32 = rec[1].trim().parse().map_err(|_| bad("age"))?;
        let v: f64 = rec[2].trim().parse().map_err(|_| bad("log_rate"))?;
        match years.last() {
            None => years.push(year),
            Some(&y) if y == year => {}
            Some(&y) if year == y + 1 => years.push(year),
            Some(&y) => {
                return Err(Error::SchemaMismatch(format!(
                    "line {line}: year {year} follows {y}"
                )))
            }
        }
        if years.len() == 1 {
            if let Some(&a) = ages.last() {
                if age != a + 1 {
                    return Err(Error::SchemaMismatch(format!("line {line}: age {age} follows {a}")));
                }
            }
            ages.push(age);
        } else {
            let j = values.len() % ages.len();
            if age != ages[j] {
                return Err(Error::SchemaMismatch(format!(
                    "line {line}: expected age {}, found {age}",
                    ages[j]
                )));
            }
        }
        values.push(T::lit(v));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != years.len() * ages.len() {
        return Err(Error::SchemaMismatch("incomplete final year".into()));
    }
    let rates = Matrix::from_vec(years.len(), ages.len(), values);
    MortalitySurface::new(population_id, ages, years, rates, kind)
}
