//! The JSON run configuration.

use std::path::{Path, PathBuf};

use ordscore::model::Family;
use ordscore::optimizer::OptimizerOptions;
use ordscore::spline::SplineMethod;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseTransform {
    #[default]
    Identity,
    Sqrt,
    Log,
}

impl ResponseTransform {
    pub fn apply(self, v: f64) -> Option<f64> {
        match self {
            ResponseTransform::Identity => Some(v),
            ResponseTransform::Sqrt if v >= 0.0 => Some(v.sqrt()),
            ResponseTransform::Log if v > 0.0 => Some(v.ln()),
            _ => None,
        }
    }

    /// Display name of the transformed response, e.g. `sqrt(price)`.
    pub fn label(self, column: &str) -> String {
        match self {
            ResponseTransform::Identity => column.to_string(),
            ResponseTransform::Sqrt => format!("sqrt({column})"),
            ResponseTransform::Log => format!("log({column})"),
        }
    }
}

fn default_degree() -> usize {
    1
}

fn default_knots() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub column: String,
    /// Level labels from lowest to highest.
    pub levels: Vec<String>,
    /// Polynomial contrast degree for the baseline (and for unscored factors).
    #[serde(default = "default_degree")]
    pub contrast_degree: usize,
    #[serde(default = "default_true")]
    pub scored: bool,
    #[serde(default = "default_knots")]
    pub spline_knots: usize,
    #[serde(default)]
    pub spline_method: SplineMethod,
    /// Fixed scores, one per level; scored variants then skip the search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    /// CSV path; relative paths are taken from the config file's directory.
    pub data: PathBuf,
    pub response: String,
    #[serde(default)]
    pub response_transform: ResponseTransform,
    #[serde(default)]
    pub family: Family,
    #[serde(default)]
    pub numeric_covariates: Vec<String>,
    pub factors: Vec<FactorConfig>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerOptions,
}

fn default_output() -> PathBuf {
    PathBuf::from("ordscore-out")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.data.is_relative() {
            config.data = base.join(&config.data);
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        let columns = std::iter::once(&self.response)
            .chain(&self.numeric_covariates)
            .chain(self.factors.iter().map(|f| &f.column));
        for c in columns {
            if !seen.insert(c.as_str()) {
                return Err(CliError::Config(format!(
                    "column `{c}` is used more than once"
                )));
            }
        }
        for f in &self.factors {
            if let Some(scores) = &f.scores {
                if scores.len() != f.levels.len() {
                    return Err(CliError::Config(format!(
                        "factor `{}` has {} levels but {} scores",
                        f.column,
                        f.levels.len(),
                        scores.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn response_label(&self) -> String {
        self.response_transform.label(&self.response)
    }
}
