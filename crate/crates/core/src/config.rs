//! Flat `key = value` experiment configuration.
//!
//! One key per line; `#` starts a comment; list values are comma separated.
//!
//! ```text
//! family = lomax
//! alpha = 3
//! theta = 2
//! lambda = 0.5
//! u = 25, 50, 100, 200
//! x = 1
//! n = 1000000
//! seed = 20240601
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::asymptotics::{ConstantMode, PsiUMode};
use crate::dist::ClaimModel;
use crate::error::RuinError;
use crate::simulate::McConfig;
use crate::transforms::{InversionConfig, RiskModel};

pub const MIN_SAMPLES: u64 = 1000;

const KEYS: &[&str] = &[
    "family",
    "alpha",
    "theta",
    "rate",
    "lambda",
    "u",
    "x",
    "t",
    "n",
    "seed",
    "workers",
    "step",
    "s_max",
    "psi_u_mode",
    "constant_mode",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },

    #[error("missing required key `{0}`")]
    Missing(&'static str),

    #[error("invalid model: {0}")]
    Model(#[from] RuinError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: RiskModel,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub mc: McConfig,
    pub inversion: Option<InversionConfig>,
    pub psi_u_mode: PsiUMode,
    pub constant_mode: ConstantMode,
}

struct Entry {
    line: usize,
    value: String,
}

struct Raw(HashMap<String, Entry>);

impl Raw {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::Value {
                line: e.line,
                key: key.to_string(),
                message: format!("`{}`: {err}", e.value),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or(ConfigError::Missing(key))
    }

    fn positive_list(&self, key: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let v: f64 = item.parse().map_err(|err| ConfigError::Value {
                line: e.line,
                key: key.to_string(),
                message: format!("`{item}`: {err}"),
            })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Value {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("grid values must be positive, got {v}"),
                });
            }
            out.push(v);
        }
        Ok(Some(out))
    }

    fn value_error(&self, key: &'static str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            line: self.get(key).map_or(0, |e| e.line),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut map = HashMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = map.insert(key.to_string(), entry) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
        }
    }
    Ok(Raw(map))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let raw = tokenize(text)?;

        let family: String = raw.require("family")?;
        let claims = match family.as_str() {
            "lomax" => ClaimModel::lomax(raw.require("alpha")?, raw.require("theta")?)?,
            "exponential" => ClaimModel::exponential(raw.require("rate")?)?,
            other => {
                return Err(raw.value_error(
                    "family",
                    format!("expected `lomax` or `exponential`, got `{other}`"),
                ))
            }
        };
        let model = RiskModel::new(claims, raw.require("lambda")?)?;

        let n: u64 = raw.parse("n")?.unwrap_or(100_000);
        if n < MIN_SAMPLES {
            return Err(raw.value_error("n", format!("sample count must be >= {MIN_SAMPLES}, got {n}")));
        }
        let seed: u64 = raw.require("seed")?;
        let workers: usize = raw.parse("workers")?.unwrap_or(1);
        let mc = McConfig::new(n, seed, workers).map_err(|e| raw.value_error("workers", e.to_string()))?;

        let inversion = match (raw.parse::<f64>("step")?, raw.parse::<f64>("s_max")?) {
            (None, None) => None,
            (Some(step), Some(s_max)) => {
                Some(InversionConfig::new(step, s_max).map_err(|e| raw.value_error("step", e.to_string()))?)
            }
            _ => return Err(raw.value_error("step", "`step` and `s_max` must be given together")),
        };

        let psi_u_mode = match raw.get("psi_u_mode").map(|e| e.value.as_str()) {
            None | Some("mc_plugin") => PsiUMode::McPlugin,
            Some("asymptotic_plugin") => PsiUMode::AsymptoticPlugin,
            Some(other) => {
                return Err(raw.value_error(
                    "psi_u_mode",
                    format!("expected `mc_plugin` or `asymptotic_plugin`, got `{other}`"),
                ))
            }
        };
        let constant_mode = match raw.get("constant_mode").map(|e| e.value.as_str()) {
            None | Some("paper_verbatim") => ConstantMode::PaperVerbatim,
            Some("half_correction") => ConstantMode::HalfCorrection,
            Some(other) => {
                return Err(raw.value_error(
                    "constant_mode",
                    format!("expected `paper_verbatim` or `half_correction`, got `{other}`"),
                ))
            }
        };

        Ok(Self {
            model,
            u: raw.positive_list("u")?.unwrap_or_default(),
            x: raw.positive_list("x")?.unwrap_or_else(|| vec![1.0]),
            t: raw.positive_list("t")?.unwrap_or_default(),
            mc,
            inversion,
            psi_u_mode,
            constant_mode,
        })
    }
}
