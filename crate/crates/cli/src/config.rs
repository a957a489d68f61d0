//! Run configuration: flags, then an optional `key = value` file, then
//! environment, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use mortfpca::evaluation::{ComponentRule, DEFAULT_WINDOWS};
use mortfpca::forecasters::{ModelConfig, ModelKind, DEFAULT_ALPHA};
use mortfpca::ufpca::WeightPower;

pub const DATA_ENV: &str = "MFPCA_DATA_DIR";

/// Options shared by every subcommand. All are optional so that a config
/// file can fill the gaps.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Data directory holding observed/, smoothed/ and sigma/.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Flat `key = value` file; flags win over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model name, or a comma list for `evaluate`.
    #[arg(long)]
    pub model: Option<String>,
    /// Forecast horizon, or a comma list for `evaluate`.
    #[arg(long)]
    pub h: Option<String>,
    /// Geometric weight parameter in (0, 1), or `auto`. Absent means uniform.
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long = "var-threshold")]
    pub var_threshold: Option<f64>,
    #[arg(long)]
    pub ncomp: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub windows: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write SVG charts.
    #[arg(long)]
    pub plot: bool,
    /// 1 or 0.5.
    #[arg(long = "weight-power")]
    pub weight_power: Option<f64>,
    /// Comma list of population ids.
    #[arg(long)]
    pub populations: Option<String>,
    /// Label used in eval.csv. Defaults to the population id prefix.
    #[arg(long)]
    pub country: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    Uniform,
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: PathBuf,
    pub models: Vec<ModelKind>,
    pub horizons: Vec<usize>,
    pub kappa: Kappa,
    pub rule: ComponentRule,
    pub alpha: f64,
    pub windows: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub plot: bool,
    pub power: WeightPower,
    pub populations: Option<Vec<String>>,
    pub country: Option<String>,
}

const KEYS: [&str; 14] = [
    "data", "model", "h", "kappa", "var_threshold", "ncomp", "alpha", "windows", "out", "seed", "plot",
    "weight_power", "populations", "country",
];

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cli: cannot read config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("cli: config line {} is not `key = value`", n + 1);
        };
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            bail!("cli: unknown config key {key:?} on line {}", n + 1);
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow::anyhow!("cli: invalid value {v:?} for {key}"))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

impl RunConfig {
    pub fn resolve(opts: &Opts) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

        let data = pick(opts.data.as_ref().map(|p| p.display().to_string()), "data")
            .or_else(|| std::env::var(DATA_ENV).ok())
            .unwrap_or_else(|| "data".into());
        let models = match pick(opts.model.clone(), "model") {
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<ModelKind>().map_err(|_| anyhow::anyhow!("cli: unknown model {:?}", s.trim())))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let horizons = match pick(opts.h.clone(), "h") {
            Some(v) => list::<usize>("h", &v)?,
            None => Vec::new(),
        };
        if horizons.contains(&0) {
            bail!("cli: horizon must be at least 1");
        }
        let kappa = match pick(opts.kappa.clone(), "kappa").as_deref() {
            None => Kappa::Uniform,
            Some("auto") => Kappa::Auto,
            Some(v) => {
                let k: f64 = parse("kappa", v)?;
                if !(k > 0.0 && k < 1.0) {
                    bail!("cli: kappa {k} outside (0, 1)");
                }
                Kappa::Fixed(k)
            }
        };
        let threshold = match opts.var_threshold {
            Some(v) => v,
            None => file.get("var_threshold").map(|v| parse("var_threshold", v)).transpose()?.unwrap_or(0.9),
        };
        if !(threshold > 0.0 && threshold <= 1.0) {
            bail!("cli: var-threshold {threshold} outside (0, 1]");
        }
        let ncomp = match opts.ncomp {
            Some(n) => Some(n),
            None => file.get("ncomp").map(|v| parse::<usize>("ncomp", v)).transpose()?,
        };
        if ncomp == Some(0) {
            bail!("cli: ncomp must be at least 1");
        }
        let alpha = match opts.alpha {
            Some(a) => a,
            None => file.get("alpha").map(|v| parse("alpha", v)).transpose()?.unwrap_or(DEFAULT_ALPHA),
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            bail!("cli: alpha {alpha} outside (0, 1)");
        }
        let windows = match opts.windows {
            Some(w) => w,
            None => file.get("windows").map(|v| parse("windows", v)).transpose()?.unwrap_or(DEFAULT_WINDOWS),
        };
        if windows == 0 {
            bail!("cli: windows must be at least 1");
        }
        let out = pick(opts.out.as_ref().map(|p| p.display().to_string()), "out").unwrap_or_else(|| "out".into());
        let seed = match opts.seed {
            Some(s) => s,
            None => file.get("seed").map(|v| parse("seed", v)).transpose()?.unwrap_or(1),
        };
        let plot = opts.plot || file.get("plot").map(|v| parse::<bool>("plot", v)).transpose()?.unwrap_or(false);
        let wp = match opts.weight_power {
            Some(p) => p,
            None => file.get("weight_power").map(|v| parse("weight_power", v)).transpose()?.unwrap_or(1.0),
        };
        let power = if wp == 1.0 {
            WeightPower::One
        } else if wp == 0.5 {
            WeightPower::Half
        } else {
            bail!("cli: weight-power must be 1 or 0.5, got {wp}");
        };
        let populations = pick(opts.populations.clone(), "populations")
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
        let country = pick(opts.country.clone(), "country");

        Ok(Self {
            data: data.into(),
            models,
            horizons,
            kappa,
            rule: ComponentRule {
                threshold,
                override_n: ncomp,
            },
            alpha,
            windows,
            out: out.into(),
            seed,
            plot,
            power,
            populations,
            country,
        })
    }

    /// The single model a command works with.
    pub fn model(&self) -> Result<ModelKind> {
        match self.models.as_slice() {
            [] => bail!("cli: --model is required"),
            [m] => Ok(*m),
            _ => bail!("cli: this command takes a single model"),
        }
    }

    pub fn horizon(&self, default: usize) -> Result<usize> {
        match self.horizons.as_slice() {
            [] => Ok(default),
            [h] => Ok(*h),
            _ => bail!("cli: this command takes a single horizon"),
        }
    }

    pub fn model_config(&self, kind: ModelKind, kappa: Option<f64>) -> ModelConfig<f64> {
        ModelConfig {
            kind,
            kappa,
            rule: self.rule,
            power: self.power,
            alpha: self.alpha,
            weighted_independent: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> (tempfile::NamedTempFile, PathBuf) {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        let p = f.path().to_path_buf();
        (f, p)
    }

    #[test]
    fn flags_override_the_file() {
        let (_f, path) = file("model = coherent\nh = 20\nkappa = 0.3 # tuned\n\nalpha = 0.2\nweight-power = 0.5\n");
        let opts = Opts {
            config: Some(path),
            h: Some("5".into()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&opts).unwrap();
        assert_eq!(cfg.models, vec![ModelKind::Coherent]);
        assert_eq!(cfg.horizons, vec![5]);
        assert_eq!(cfg.kappa, Kappa::Fixed(0.3));
        assert_eq!(cfg.alpha, 0.2);
        assert_eq!(cfg.power, WeightPower::Half);
        assert_eq!(cfg.windows, DEFAULT_WINDOWS);
    }

    #[test]
    fn bad_values_are_rejected() {
        for opts in [
            Opts { kappa: Some("1.5".into()), ..Default::default() },
            Opts { alpha: Some(0.0), ..Default::default() },
            Opts { var_threshold: Some(1.2), ..Default::default() },
            Opts { model: Some("lee_carter".into()), ..Default::default() },
            Opts { h: Some("0".into()), ..Default::default() },
            Opts { weight_power: Some(2.0), ..Default::default() },
        ] {
            let e = RunConfig::resolve(&opts).unwrap_err().to_string();
            assert!(e.starts_with("cli: "), "{e}");
        }
        let (_f, path) = file("colour = blue\n");
        assert!(RunConfig::resolve(&Opts { config: Some(path), ..Default::default() }).is_err());
    }

    #[test]
    fn kappa_modes() {
        let k = |v: Option<&str>| RunConfig::resolve(&Opts { kappa: v.map(String::from), ..Default::default() }).unwrap().kappa;
        assert_eq!(k(None), Kappa::Uniform);
        assert_eq!(k(Some("auto")), Kappa::Auto);
        assert_eq!(k(Some("0.25")), Kappa::Fixed(0.25));
    }
}
