//! Experiment configuration.
//!
//! A TOML file is read into a table, command-line flags are merged on top,
//! the keys are checked against the subcommand's schema and the result is
//! deserialized into [`ExperimentConfig`]. The merged table is what gets
//! snapshotted into the run directory, so re-running the snapshot
//! reproduces the run.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zakharov_core::dynamics::ModelParams;
use zakharov_core::field::{Complex, FourierField};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    NormalformCheck,
    Smoothing,
    Attractor,
    Bounds,
    Gauge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::NormalformCheck => "normalform-check",
            Command::Smoothing => "smoothing",
            Command::Attractor => "attractor",
            Command::Bounds => "bounds",
            Command::Gauge => "gauge",
        }
    }

    /// Top-level keys accepted by this subcommand.
    pub fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Command::Simulate => &[
                "alpha", "N", "dt", "t_end", "sample_stride", "amplitude", "seeds", "ensemble_size",
                "output_dir", "tolerances", "gamma", "forcing", "data", "s0", "s1", "s_list",
            ],
            Command::NormalformCheck => &[
                "alpha", "N", "s0", "s1", "amplitude", "seeds", "with_rho", "rho2_variant", "output_dir",
                "tolerances",
            ],
            Command::Smoothing => &[
                "alpha", "N", "dt", "t_end", "sample_stride", "seeds", "ensemble_size", "output_dir",
                "tolerances", "s0", "s1", "fit_band", "reference_time", "s_list",
            ],
            Command::Attractor => &[
                "alpha", "N", "dt", "t_end", "sample_stride", "amplitude", "seeds", "ensemble_size",
                "output_dir", "tolerances", "gamma", "forcing", "data", "a_list", "window",
            ],
            Command::Bounds => &["alpha", "s0", "s1", "b", "K", "sweeps", "output_dir", "tolerances"],
            Command::Gauge => &[
                "alpha", "N", "dt", "t_end", "sample_stride", "amplitude", "seeds", "output_dir", "n0_mean",
                "n1_mean",
            ],
        }
    }

    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            Command::Simulate | Command::Smoothing | Command::Gauge => &["alpha", "N", "t_end"],
            Command::Attractor => &["alpha", "N", "t_end", "gamma"],
            Command::NormalformCheck => &["alpha", "N"],
            Command::Bounds => &["K"],
        }
    }
}

const FORCING_KEYS: [&str; 3] = ["modes", "h1_norm", "k_max"];
const TOLERANCE_KEYS: [&str; 6] = [
    "noise_floor",
    "growth_rate",
    "lemma_slope",
    "supsum_slope",
    "sharpness_slope",
    "fit_residual",
];

/// `alpha` as a number or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Int(i64),
    Real(f64),
    Text(String),
}

impl AlphaSpec {
    pub fn params(&self) -> Result<ModelParams> {
        let parsed = match self {
            AlphaSpec::Int(p) => ModelParams::rational(*p, 1),
            AlphaSpec::Real(a) => ModelParams::new(*a),
            AlphaSpec::Text(t) => ModelParams::parse(t),
        };
        parsed.map_err(|e| Error::validation(format!("alpha: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    #[default]
    Random,
    Zero,
}

/// Either explicit modes `[k, re, im]` or equal-amplitude real cosines on
/// `1 <= |k| <= k_max` scaled to the given `H^1` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub modes: Option<Vec<(i64, f64, f64)>>,
    pub h1_norm: Option<f64>,
    pub k_max: Option<usize>,
}

impl ForcingSpec {
    pub fn field(&self, radius: usize) -> Result<FourierField> {
        match (&self.modes, self.h1_norm) {
            (Some(_), Some(_)) => Err(Error::validation("forcing: give either modes or h1_norm, not both")),
            (Some(modes), None) => {
                let mut f = FourierField::zeros(radius);
                for &(k, re, im) in modes {
                    if k.unsigned_abs() as usize > radius {
                        return Err(Error::validation(format!("forcing mode {k} exceeds N = {radius}")));
                    }
                    f.set(k, f.get(k) + Complex::new(re, im));
                }
                Ok(f)
            }
            (None, Some(h1)) => {
                let k_max = self.k_max.unwrap_or(3);
                if k_max == 0 || k_max > radius {
                    return Err(Error::validation("forcing: k_max must lie in 1..=N"));
                }
                Ok(zakharov_core::dissipative::low_mode_forcing(radius, k_max, h1))
            }
            (None, None) => Ok(FourierField::zeros(radius)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Shells below this rms are left out of regularity fits.
    pub noise_floor: f64,
    /// Largest `d log norm / dt` still called sub-exponential.
    pub growth_rate: f64,
    pub lemma_slope: f64,
    pub supsum_slope: f64,
    pub sharpness_slope: f64,
    /// Largest RMS fit residual relative to `Q(0)`.
    pub fit_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            noise_floor: zakharov_core::regularity::DEFAULT_NOISE_FLOOR,
            growth_rate: 0.05,
            lemma_slope: 0.05,
            supsum_slope: 0.1,
            sharpness_slope: 0.5,
            fit_residual: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    pub alpha: Option<AlphaSpec>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_stride: Option<f64>,
    pub s0: Option<f64>,
    pub s1: Option<f64>,
    pub amplitude: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub ensemble_size: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Option<Tolerances>,
    pub gamma: Option<f64>,
    pub forcing: Option<ForcingSpec>,
    pub data: Option<DataKind>,
    pub s_list: Option<Vec<f64>>,
    pub a_list: Option<Vec<f64>>,
    pub window: Option<(f64, f64)>,
    pub fit_band: Option<(usize, usize)>,
    pub reference_time: Option<f64>,
    pub with_rho: Option<bool>,
    pub rho2_variant: Option<String>,
    pub b: Option<f64>,
    #[serde(rename = "K")]
    pub k_max: Option<i64>,
    pub sweeps: Option<Vec<String>>,
    pub n0_mean: Option<f64>,
    pub n1_mean: Option<f64>,
}

/// Reads a config file into a table.
pub fn load_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read config {}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| Error::validation(format!("config {} is not valid TOML: {e}", path.display())))
}

/// Checks the merged table against the subcommand schema, listing every
/// offending key, then deserializes it.
pub fn validate(cmd: Command, table: &toml::Table) -> Result<ExperimentConfig> {
    let allowed: BTreeSet<&str> = cmd.allowed_keys().iter().copied().collect();
    let mut unknown: Vec<String> = table.keys().filter(|k| !allowed.contains(k.as_str())).cloned().collect();
    for (section, keys) in [("forcing", &FORCING_KEYS[..]), ("tolerances", &TOLERANCE_KEYS[..])] {
        if let Some(toml::Value::Table(t)) = table.get(section) {
            unknown.extend(t.keys().filter(|k| !keys.contains(&k.as_str())).map(|k| format!("{section}.{k}")));
        }
    }
    if !unknown.is_empty() {
        return Err(Error::validation(format!(
            "unknown keys for `{}`: {}",
            cmd.name(),
            unknown.join(", ")
        )));
    }
    let missing: Vec<&str> = cmd
        .required_keys()
        .iter()
        .copied()
        .filter(|k| !table.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::validation(format!("missing required keys: {}", missing.join(", "))));
    }
    let cfg: ExperimentConfig = table
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::validation(e.message().to_owned()))?;
    cfg.check()?;
    Ok(cfg)
}

impl ExperimentConfig {
    fn check(&self) -> Result<()> {
        if let Some(a) = &self.alpha {
            a.params()?;
        }
        if let Some(n) = self.n {
            if n < 8 {
                return Err(Error::validation(format!("N must be at least 8 (got {n})")));
            }
        }
        for (name, v) in [("dt", self.dt), ("t_end", self.t_end), ("sample_stride", self.sample_stride)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::validation(format!("{name} must be positive (got {v})")));
                }
            }
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::validation(format!("gamma must be nonnegative (got {g})")));
            }
        }
        if matches!(&self.seeds, Some(s) if s.is_empty()) {
            return Err(Error::validation("seeds must be nonempty"));
        }
        if self.ensemble_size == Some(0) {
            return Err(Error::validation("ensemble_size must be positive"));
        }
        if let Some((lo, hi)) = self.fit_band {
            if lo == 0 || lo >= hi {
                return Err(Error::validation("fit_band must satisfy 1 <= lo < hi"));
            }
        }
        self.rho2()?;
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        self.alpha
            .as_ref()
            .ok_or_else(|| Error::validation("missing required key: alpha"))?
            .params()
    }

    pub fn radius(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::validation("missing required key: N"))
    }

    pub fn t_end(&self) -> Result<f64> {
        self.t_end.ok_or_else(|| Error::validation("missing required key: t_end"))
    }

    /// Explicit seeds, else `0..ensemble_size`, else `[0]`.
    pub fn seed_list(&self) -> Vec<u64> {
        match (&self.seeds, self.ensemble_size) {
            (Some(s), _) => s.clone(),
            (None, Some(m)) => (0..m as u64).collect(),
            (None, None) => vec![0],
        }
    }

    /// Step size, by default `0.5 / N^2`, which keeps `alpha k^2 dt` of
    /// order one at the top mode.
    pub fn dt_or_default(&self) -> Result<f64> {
        let n = self.radius()? as f64;
        Ok(self.dt.unwrap_or(0.5 / (n * n)))
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }

    pub fn rho2(&self) -> Result<zakharov_core::normal_form::Rho2Variant> {
        use zakharov_core::normal_form::Rho2Variant;
        match self.rho2_variant.as_deref() {
            None | Some("substituted") => Ok(Rho2Variant::Substituted),
            Some("as-printed") => Ok(Rho2Variant::AsPrinted),
            Some(other) => Err(Error::validation(format!(
                "rho2_variant must be `substituted` or `as-printed` (got `{other}`)"
            ))),
        }
    }
}

/// Parses `key=value` with the value read as a TOML value; bare words that
/// are not valid TOML are taken as strings.
pub fn parse_assignment(text: &str) -> Result<(String, toml::Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::validation(format!("expected key=value, got `{text}`")))?;
    let k = k.trim().to_owned();
    let src = format!("v = {}", v.trim());
    let value = match src.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(v.trim().to_owned()),
    };
    Ok((k, value))
}
