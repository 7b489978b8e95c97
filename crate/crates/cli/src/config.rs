//! Experiment configuration: JSON files and CLI flags feed the same flat
//! structure. Files are forward-compatible (unknown keys warn, never fail);
//! the `subcommand` key is the one required field.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use bo_lab::Truncation;
use serde::{Deserialize, Serialize};

/// Truncation argument: a positive integer or "inf".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncArg(pub Truncation);

impl FromStr for TruncArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
            return Ok(TruncArg(Truncation::Infinite));
        }
        s.parse::<usize>()
            .map(|n| TruncArg(Truncation::Finite(n)))
            .map_err(|_| format!("expected a positive integer or 'inf', got {s}"))
    }
}

impl fmt::Display for TruncArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Truncation::Finite(n) => write!(f, "{n}"),
            Truncation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for TruncArg {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Truncation::Finite(n) => ser.serialize_u64(n as u64),
            Truncation::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for TruncArg {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|x| TruncArg(Truncation::Finite(x as usize)))
                .ok_or_else(|| serde::de::Error::custom("truncation must be a nonnegative integer")),
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!("bad truncation value {other}"))),
        }
    }
}

/// Every knob any subcommand reads, resolved against defaults.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub n: TruncArg,
    pub n_max: usize,
    pub s: f64,
    pub dt: f64,
    pub t: f64,
    pub m: usize,
    pub seed: u64,
    pub mu_max: usize,
    pub dt_fd: f64,
    pub l2_scale: f64,
    pub psi_inner: f64,
    pub psi_outer: f64,
    pub zeta_plateau: f64,
    pub observables: Vec<String>,
    pub k_max: u64,
    pub d: u32,
    pub instances: usize,
    pub snk_n_max: u32,
    pub snk_k_max: u32,
    pub k_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub quartic_n: Vec<usize>,
    pub csv_coeffs: bool,
    pub per_sample_csv: bool,
    pub threads: usize,
    pub out_dir: PathBuf,
}

/// The same fields, all optional: a file or flag overlay.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConfigOverlay {
    pub subcommand: Option<String>,
    pub n: Option<TruncArg>,
    pub n_max: Option<usize>,
    pub s: Option<f64>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub mu_max: Option<usize>,
    pub dt_fd: Option<f64>,
    pub l2_scale: Option<f64>,
    pub psi_inner: Option<f64>,
    pub psi_outer: Option<f64>,
    pub zeta_plateau: Option<f64>,
    pub observables: Option<Vec<String>>,
    pub k_max: Option<u64>,
    pub d: Option<u32>,
    pub instances: Option<usize>,
    pub snk_n_max: Option<u32>,
    pub snk_k_max: Option<u32>,
    pub k_grid: Option<Vec<f64>>,
    pub alpha_grid: Option<Vec<f64>>,
    pub quartic_n: Option<Vec<usize>>,
    pub csv_coeffs: Option<bool>,
    pub per_sample_csv: Option<bool>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "subcommand", "n", "n_max", "s", "dt", "t", "m", "seed", "mu_max", "dt_fd", "l2_scale",
    "psi_inner", "psi_outer", "zeta_plateau", "observables", "k_max", "d", "instances",
    "snk_n_max", "snk_k_max", "k_grid", "alpha_grid", "quartic_n", "csv_coeffs",
    "per_sample_csv", "threads", "out_dir", "schema_version",
];

impl ExperimentConfig {
    pub fn defaults(subcommand: &str) -> Self {
        ExperimentConfig {
            subcommand: subcommand.to_string(),
            n: TruncArg(Truncation::Finite(8)),
            n_max: 0, // 0 means "follow n"; resolved in finish()
            s: 0.1,
            dt: match subcommand {
                "invariance" => 5e-3,
                _ => 1e-3,
            },
            t: match subcommand {
                "invariance" => 0.5,
                _ => 1.0,
            },
            m: 100_000,
            seed: 7,
            mu_max: match subcommand {
                "cancellation" => 50,
                _ => 20,
            },
            dt_fd: 1e-4,
            l2_scale: 0.5,
            psi_inner: 0.5,
            psi_outer: 0.75,
            zeta_plateau: 1.0,
            observables: vec!["mass_sq".into(), "re_1".into(), "abs_sq_2".into()],
            k_max: 10_000,
            d: 6,
            instances: 100,
            snk_n_max: 8,
            snk_k_max: 8,
            k_grid: vec![0.0, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7],
            alpha_grid: vec![2.0, 4.0, 100.0, 1700.0, 2500.0],
            quartic_n: vec![1, 4, 16],
            csv_coeffs: false,
            per_sample_csv: false,
            threads: 0,
            out_dir: default_out_dir(),
        }
    }

    pub fn apply(&mut self, overlay: &ConfigOverlay) {
        macro_rules! take {
            ($($field:ident),+ $(,)?) => {
                $(if let Some(v) = &overlay.$field { self.$field = v.clone(); })+
            };
        }
        take!(
            n, n_max, s, dt, t, m, seed, mu_max, dt_fd, l2_scale, psi_inner, psi_outer,
            zeta_plateau, observables, k_max, d, instances, snk_n_max, snk_k_max, k_grid,
            alpha_grid, quartic_n, csv_coeffs, per_sample_csv, threads, out_dir
        );
    }

    /// Fill derived fields after all overlays.
    pub fn finish(mut self) -> Self {
        if self.n_max == 0 {
            self.n_max = match self.n.0 {
                Truncation::Finite(n) => n,
                Truncation::Infinite => 32,
            };
        }
        self
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os("BO_LAB_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("bo-lab-out"))
}

/// Parse a config file: unknown keys warn (forward compatibility), a missing
/// `subcommand` is a named-field error, and the subcommand must agree with
/// the one being run.
pub fn load_config(path: &Path, expected_subcommand: &str) -> anyhow::Result<ConfigOverlay> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("config {} is not valid JSON", path.display()))?;
    let obj = value
        .as_object()
        .with_context(|| format!("config {} must be a JSON object", path.display()))?;
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            eprintln!("warning: config field `{key}` is not recognized; ignoring it");
        }
    }
    let overlay: ConfigOverlay =
        serde_json::from_value(value.clone()).context("config has a field of the wrong type")?;
    match &overlay.subcommand {
        None => bail!("config is missing required field `subcommand`"),
        Some(sub) if sub != expected_subcommand => {
            bail!("config is for subcommand `{sub}`, but `{expected_subcommand}` was invoked")
        }
        _ => {}
    }
    Ok(overlay)
}

/// Write a config (round-trips losslessly through load).
pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(cfg)?;
    std::fs::write(path, text)
        .with_context(|| format!("cannot write config {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip() {
        let cfg = ExperimentConfig::defaults("invariance").finish();
        let dir = std::env::temp_dir().join("bo_lab_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        save_config(&cfg, &path).unwrap();
        let overlay = load_config(&path, "invariance").unwrap();
        let mut rebuilt = ExperimentConfig::defaults("invariance");
        rebuilt.apply(&overlay);
        let rebuilt = rebuilt.finish();
        assert_eq!(rebuilt, cfg);
    }

    #[test]
    fn missing_subcommand_is_named_error() {
        let dir = std::env::temp_dir().join("bo_lab_cfg_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, r#"{ "n": 8 }"#).unwrap();
        let err = load_config(&path, "invariance").unwrap_err();
        assert!(err.to_string().contains("subcommand"));
    }

    #[test]
    fn truncation_arg_forms() {
        assert_eq!("inf".parse::<TruncArg>().unwrap().0, Truncation::Infinite);
        assert_eq!("16".parse::<TruncArg>().unwrap().0, Truncation::Finite(16));
        assert!("x".parse::<TruncArg>().is_err());
        let json = serde_json::to_string(&TruncArg(Truncation::Infinite)).unwrap();
        assert_eq!(json, "\"inf\"");
        let back: TruncArg = serde_json::from_str("12").unwrap();
        assert_eq!(back.0, Truncation::Finite(12));
    }
}
