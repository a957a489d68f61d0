//! Layout of the data directory: `observed/`, `smoothed/` and `sigma/`, one
//! `<population id>.csv` per surface.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mortfpca::hmd::{read_surface_csv, MortalitySurface, SurfaceBundle, SurfaceKind};
use mortfpca::smoothing::ResidualField;

pub const OBSERVED: &str = "observed";
pub const SMOOTHED: &str = "smoothed";
pub const SIGMA: &str = "sigma";

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cli: cannot read {}", dir.display()))?;
    let mut files = Vec::new();
    for e in entries {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        bail!("cli: no surfaces in {}", dir.display());
    }
    Ok(files)
}

/// Default selection: the male/female pair when present, otherwise all.
fn default_ids(all: &[String]) -> Vec<String> {
    for m in all.iter().filter(|id| id.ends_with("_male")) {
        let f = format!("{}_female", m.trim_end_matches("_male"));
        if all.contains(&f) {
            return vec![m.clone(), f];
        }
    }
    all.to_vec()
}

pub fn population_ids(data: &Path, sub: &str, wanted: Option<&[String]>) -> Result<Vec<String>> {
    let all: Vec<String> = csv_files(&data.join(sub))?
        .iter()
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    match wanted {
        Some(ids) => {
            if let Some(missing) = ids.iter().find(|id| !all.contains(id)) {
                bail!("cli: population {missing:?} not found in {}", data.join(sub).display());
            }
            Ok(ids.to_vec())
        }
        None => Ok(default_ids(&all)),
    }
}

pub fn load_bundle(data: &Path, sub: &str, ids: &[String]) -> Result<SurfaceBundle<f64>> {
    let kind = if sub == OBSERVED { SurfaceKind::Observed } else { SurfaceKind::Smoothed };
    let surfaces = ids
        .iter()
        .map(|id| read_surface_csv(data.join(sub).join(format!("{id}.csv")), kind))
        .collect::<mortfpca::Result<Vec<_>>>()?;
    Ok(SurfaceBundle::new(surfaces)?)
}

/// Residual fields aligned with `bundle`, when every one is on disk.
pub fn load_sigma(data: &Path, bundle: &SurfaceBundle<f64>) -> Result<Option<Vec<ResidualField<f64>>>> {
    let dir = data.join(SIGMA);
    let mut fields = Vec::new();
    for s in bundle.surfaces() {
        let path = dir.join(format!("{}.csv", s.population_id));
        if !path.exists() {
            return Ok(None);
        }
        let sig: MortalitySurface<f64> = read_surface_csv(&path, SurfaceKind::Smoothed)?;
        if sig.years != s.years || sig.ages != s.ages {
            bail!("cli: sigma field {} is not aligned with its surface", path.display());
        }
        fields.push(ResidualField::from_sigma(sig.log_rates));
    }
    Ok(Some(fields))
}

/// Country label: the shared prefix of the ids before the last `_`.
pub fn country_label(ids: &[String]) -> String {
    let prefix = |id: &str| id.rsplit_once('_').map_or(id, |p| p.0).to_string();
    let first = prefix(&ids[0]);
    if ids.iter().all(|id| prefix(id) == first) {
        first
    } else {
        "mixed".into()
    }
}
