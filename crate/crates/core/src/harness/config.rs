//! Run configuration: a flat `key = value` file (TOML syntax) plus
//! command-line overrides, applied in order on top of an optional preset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate_tau, calibrate_tau_unsnapped, CalibrationTarget, PriorSpec};
use crate::error::{Error, Result};
use crate::sampler::{ChainConfig, SamplerMode};
use crate::stats::SpdMatrix;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "RGMM_OUTPUT_DIR";

/// Named settings from the simulation study and the real-data analyses.
///
/// | preset        | mode       | k  | tau    | Psi   | nu | B    | S     | T  |
/// |---------------|------------|----|--------|-------|----|------|-------|----|
/// | `sim-m1`      | i.i.d.     | 10 |        | 0.06  | 5  | 1000 | 10000 | 10 |
/// | `sim-m2`      | repulsive  | 10 | 5.45   | 0.06  | 5  | 5000 | 10000 | 20 |
/// | `sim-m3`      | repulsive  | 10 | 17.17  | 0.06  | 5  | 5000 | 10000 | 20 |
/// | `galaxy`      | repulsive  | 10 | 5.45   | 0.15  | 5  | 5000 | 10000 | 50 |
/// | `air-quality` | repulsive  | 10 | 116.76 | 3 I   | 6  | 5000 | 10000 | 50 |
pub const PRESETS: [&str; 5] = ["sim-m1", "sim-m2", "sim-m3", "galaxy", "air-quality"];

/// Every setting needed to reproduce one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    /// Delimited data file; exclusive with `builtin`.
    pub input: Option<PathBuf>,
    /// Columns to read from `input`, by header name or one-based index.
    pub columns: Vec<String>,
    /// Extra missing-value tokens for `input`.
    pub missing: Vec<String>,
    /// Built-in generating mixture; exclusive with `input`.
    pub builtin: Option<String>,
    /// Sample size drawn from `builtin`.
    pub n: usize,
    pub mode: SamplerMode,
    pub k: usize,
    pub burn_in: usize,
    pub n_saved: usize,
    pub thin: usize,
    pub seed: u64,
    /// Stream used to simulate builtin data.
    pub data_stream_id: u64,
    /// Stream used by the chain.
    pub stream_id: u64,
    pub tau: Option<f64>,
    pub u: Option<f64>,
    pub p: Option<f64>,
    /// Diagonal of the inverse-Wishart scale `Psi`; `3 psi` when set through
    /// `psi`. Required: there is no data-independent default.
    pub psi_scale: Option<f64>,
    /// Defaults to `d + 4`.
    pub nu: Option<f64>,
    /// Common Dirichlet concentration; defaults to `1/k`.
    pub alpha: Option<f64>,
    /// Common entry of the baseline mean.
    pub mu: f64,
    /// Diagonal of the baseline covariance.
    pub sigma: f64,
    pub standardize: bool,
    /// Points per axis of the evaluation grid.
    pub grid_points: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            input: None,
            columns: Vec::new(),
            missing: Vec::new(),
            builtin: None,
            n: 500,
            mode: SamplerMode::Repulsive,
            k: 10,
            burn_in: 5000,
            n_saved: 10000,
            thin: 20,
            seed: 1,
            data_stream_id: 0,
            stream_id: 1,
            tau: None,
            u: Some(0.5),
            p: Some(0.95),
            psi_scale: None,
            nu: None,
            alpha: None,
            mu: 0.0,
            sigma: 1.0,
            standardize: true,
            grid_points: None,
            output_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{value}`: {e}")))
}

fn optional(value: &str) -> Option<&str> {
    let v = value.trim();
    (!v.is_empty() && v != "none").then_some(v)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply("preset", name)?;
        Ok(c)
    }

    /// Sets one key. `tau` clears `(u, p)` and vice versa.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => self.apply_preset(value.trim())?,
            "input" => {
                self.input = optional(value).map(PathBuf::from);
                if self.input.is_some() {
                    self.builtin = None;
                }
            }
            "columns" => self.columns = list(value),
            "missing" => self.missing = list(value),
            "builtin" => {
                self.builtin = optional(value).map(str::to_string);
                if self.builtin.is_some() {
                    self.input = None;
                }
            }
            "n" => self.n = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "burn_in" => self.burn_in = parse(key, value)?,
            "n_saved" => self.n_saved = parse(key, value)?,
            "thin" => self.thin = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "data_stream_id" => self.data_stream_id = parse(key, value)?,
            "stream_id" => self.stream_id = parse(key, value)?,
            "tau" => {
                self.tau = optional(value).map(|v| parse(key, v)).transpose()?;
                if self.tau.is_some() {
                    self.u = None;
                    self.p = None;
                }
            }
            "u" | "p" => {
                let v = optional(value).map(|v| parse(key, v)).transpose()?;
                if key == "u" {
                    self.u = v;
                } else {
                    self.p = v;
                }
                if v.is_some() {
                    self.tau = None;
                }
            }
            "psi" => self.psi_scale = optional(value).map(|v| parse::<f64>(key, v).map(|p| 3.0 * p)).transpose()?,
            "psi_scale" => self.psi_scale = optional(value).map(|v| parse(key, v)).transpose()?,
            "nu" => self.nu = optional(value).map(|v| parse(key, v)).transpose()?,
            "alpha" => self.alpha = optional(value).map(|v| parse(key, v)).transpose()?,
            "mu" => self.mu = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "standardize" => self.standardize = parse(key, value)?,
            "grid_points" => self.grid_points = optional(value).map(|v| parse(key, v)).transpose()?,
            "output_dir" => self.output_dir = optional(value).map(PathBuf::from),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn apply_preset(&mut self, name: &str) -> Result<()> {
        let settings: &[(&str, &str)] = match name {
            "sim-m1" => &[
                ("mode", "iid-baseline"),
                ("tau", ""),
                ("u", ""),
                ("p", ""),
                ("builtin", "sim-study-1d"),
                ("psi_scale", "0.06"),
                ("nu", "5"),
                ("burn_in", "1000"),
                ("thin", "10"),
            ],
            "sim-m2" => &[
                ("mode", "repulsive"),
                ("builtin", "sim-study-1d"),
                ("tau", "5.45"),
                ("psi_scale", "0.06"),
                ("nu", "5"),
                ("burn_in", "5000"),
                ("thin", "20"),
            ],
            "sim-m3" => &[
                ("mode", "repulsive"),
                ("builtin", "sim-study-1d"),
                ("tau", "17.17"),
                ("psi_scale", "0.06"),
                ("nu", "5"),
                ("burn_in", "5000"),
                ("thin", "20"),
            ],
            "galaxy" => &[
                ("mode", "repulsive"),
                ("tau", "5.45"),
                ("psi_scale", "0.15"),
                ("nu", "5"),
                ("burn_in", "5000"),
                ("thin", "50"),
            ],
            "air-quality" => &[
                ("mode", "repulsive"),
                ("tau", "116.76"),
                ("psi_scale", "3"),
                ("nu", "6"),
                ("burn_in", "5000"),
                ("thin", "50"),
            ],
            other => {
                return Err(Error::Config(format!(
                    "unknown preset `{other}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        for (k, v) in settings {
            self.apply(k, v)?;
        }
        self.k = 10;
        self.n_saved = 10000;
        self.alpha = Some(0.1);
        self.mu = 0.0;
        self.sigma = 1.0;
        self.preset = Some(name.to_string());
        Ok(())
    }

    /// Applies `key=value` strings in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{}` is not key=value", o.as_ref())))?;
            self.apply(k.trim(), v)?;
        }
        Ok(())
    }

    /// Parses a flat TOML document. A `preset` key is applied first so the
    /// remaining keys refine it.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("config syntax: {e}")))?;
        let mut config = Self::default();
        if let Some(p) = table.get("preset") {
            config.apply("preset", &toml_scalar("preset", p)?)?;
        }
        for (key, value) in table.iter().filter(|(k, _)| *k != "preset") {
            config.apply(key, &toml_scalar(key, value)?)?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Output directory: the configured one, else `$RGMM_OUTPUT_DIR`, else `rgmm-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("rgmm-out"))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.builtin) {
            (Some(_), Some(_)) => return Err(Error::Config("set only one of `input` and `builtin`".into())),
            (None, None) => return Err(Error::Config("set `input` or `builtin`".into())),
            _ => {}
        }
        if self.builtin.is_some() && self.n == 0 {
            return Err(Error::Config("`n` must be >= 1 for builtin data".into()));
        }
        if self.mode == SamplerMode::Repulsive {
            match (self.tau, self.u, self.p) {
                (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                _ => {
                    return Err(Error::Config(
                        "repulsive mode needs exactly one of `tau` or the pair (`u`, `p`)".into(),
                    ))
                }
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("`tau` must be positive, got {t}")));
            }
        }
        for (key, v) in [("u", self.u), ("p", self.p)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::Config(format!("`{key}` must lie in (0,1), got {v}")));
                }
            }
        }
        let min_k = if self.mode == SamplerMode::Repulsive { 2 } else { 1 };
        if self.k < min_k {
            return Err(Error::Config(format!("`k` must be >= {min_k} in {} mode", self.mode)));
        }
        if self.burn_in == 0 || self.n_saved == 0 || self.thin == 0 {
            return Err(Error::Config("`burn_in`, `n_saved` and `thin` must be >= 1".into()));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) {
                return Err(Error::Config(format!("`alpha` must be positive, got {a}")));
            }
        }
        match self.psi_scale {
            None => return Err(Error::Config("set `psi` (Psi = 3 psi I) or `psi_scale`".into())),
            Some(p) if !(p > 0.0) => return Err(Error::Config(format!("`psi_scale` must be positive, got {p}"))),
            _ => {}
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config("`sigma` must be positive".into()));
        }
        if self.grid_points == Some(0) || self.grid_points == Some(1) {
            return Err(Error::Config("`grid_points` must be >= 2".into()));
        }
        Ok(())
    }

    /// Resolves tau (calibrating if needed) and builds the prior for `d`-dimensional data.
    pub fn resolve(&self, d: usize) -> Result<ResolvedPrior> {
        self.validate()?;
        let tau = match self.mode {
            SamplerMode::IidBaseline => None,
            SamplerMode::Repulsive => Some(match (self.tau, self.u, self.p) {
                (Some(t), _, _) => TauResolution {
                    tau: t,
                    calibrated_from: None,
                    unsnapped: None,
                },
                (None, Some(u), Some(p)) => {
                    let target = CalibrationTarget::new(d, u, p)?;
                    TauResolution {
                        tau: calibrate_tau(&target)?,
                        calibrated_from: Some((u, p)),
                        unsnapped: Some(calibrate_tau_unsnapped(&target)?),
                    }
                }
                _ => unreachable!("validated above"),
            }),
        };
        let prior = PriorSpec {
            k: self.k,
            d,
            alpha: vec![self.alpha.unwrap_or(1.0 / self.k as f64); self.k],
            mu: vec![self.mu; d],
            sigma: SpdMatrix::scaled_identity(d, self.sigma),
            tau: tau.as_ref().map(|t| t.tau),
            psi_scale: SpdMatrix::scaled_identity(d, self.psi_scale.expect("validated")),
            nu: self.nu.unwrap_or(d as f64 + 4.0),
        };
        prior.validate()?;
        Ok(ResolvedPrior { prior, tau })
    }

    pub fn chain_config(&self, prior: PriorSpec) -> ChainConfig {
        ChainConfig {
            burn_in: self.burn_in,
            n_saved: self.n_saved,
            thin: self.thin,
            seed: self.seed,
            stream_id: self.stream_id,
            prior,
            mode: self.mode,
        }
    }
}

fn toml_scalar(key: &str, value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| toml_scalar(key, v))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => return Err(Error::Config(format!("`{key}` must be a scalar or a list"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauResolution {
    pub tau: f64,
    /// `(u, p)` when tau came from calibration.
    pub calibrated_from: Option<(f64, f64)>,
    pub unsnapped: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ResolvedPrior {
    pub prior: PriorSpec,
    pub tau: Option<TauResolution>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_and_target_are_exclusive() {
        let mut c = RunConfig::default();
        c.apply_overrides(&["builtin=sim-study-1d", "psi=0.02"]).unwrap();
        c.apply("tau", "3").unwrap();
        assert_eq!((c.u, c.p), (None, None));
        c.apply("u", "0.2").unwrap();
        assert_eq!(c.tau, None);
        assert!(c.validate().is_err());
        c.apply("p", "0.9").unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn file_refines_preset() {
        let c = RunConfig::from_toml_str("n = 200\npreset = \"sim-m2\"\nthin = 2\ncolumns = [\"a\", 3]\n").unwrap();
        assert_eq!(c.preset.as_deref(), Some("sim-m2"));
        assert_eq!((c.n, c.thin, c.burn_in), (200, 2, 5000));
        assert_eq!(c.tau, Some(5.45));
        assert_eq!(c.columns, vec!["a", "3"]);
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn presets_resolve() {
        let m1 = RunConfig::preset("sim-m1").unwrap().resolve(1).unwrap();
        assert!(m1.tau.is_none());
        assert_eq!(m1.prior.alpha, vec![0.1; 10]);
        assert!((m1.prior.psi_scale.matrix()[(0, 0)] - 0.06).abs() < 1e-15);
        assert_eq!(m1.prior.nu, 5.0);
        let mut aq = RunConfig::preset("air-quality").unwrap();
        aq.apply("input", "aq.csv").unwrap();
        let aq = aq.resolve(2).unwrap();
        assert_eq!(aq.prior.tau, Some(116.76));
        assert_eq!(aq.prior.nu, 6.0);
    }

    #[test]
    fn calibrated_tau_is_recorded() {
        let mut c = RunConfig::default();
        c.apply("builtin", "sim-study-1d").unwrap();
        assert!(c.validate().is_err());
        c.apply("psi", "0.02").unwrap();
        let r = c.resolve(1).unwrap();
        let t = r.tau.unwrap();
        assert_eq!(t.calibrated_from, Some((0.5, 0.95)));
        assert!((t.tau / 5.45 - 1.0).abs() < 0.02);
    }

    #[test]
    fn serde_round_trip() {
        let c = RunConfig::preset("galaxy").unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
