//! CSV ingestion.

use std::collections::HashMap;
use std::path::Path;

use ordscore::encoding::OrderedFactor;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// The columns a run uses, typed and checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Response after the configured transform.
    pub response: Vec<f64>,
    pub covariates: Vec<(String, Vec<f64>)>,
    pub factors: Vec<OrderedFactor>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.response.len()
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "NaN" | "nan" | "null")
}

/// Reads `path` and extracts the columns named in `config`. Rows are numbered from 1 after the header in error messages.
pub fn load_dataset(path: &Path, config: &RunConfig) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let index_of = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| {
                CliError::Config(format!("column `{name}` not found in {}", path.display()))
            })
    };

    let response_col = index_of(&config.response)?;
    let covariate_cols = config
        .numeric_covariates
        .iter()
        .map(|c| index_of(c))
        .collect::<Result<Vec<_>>>()?;
    let factor_cols = config
        .factors
        .iter()
        .map(|f| index_of(&f.column))
        .collect::<Result<Vec<_>>>()?;
    let level_maps: Vec<HashMap<&str, usize>> = config
        .factors
        .iter()
        .map(|f| {
            f.levels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i))
                .collect()
        })
        .collect();

    let mut response = Vec::new();
    let mut covariates = vec![Vec::new(); covariate_cols.len()];
    let mut codes = vec![Vec::new(); factor_cols.len()];

    for (row, record) in reader.records().enumerate() {
        let row = row + 1;
        let record =
            record.map_err(|e| CliError::Data(format!("{}: row {row}: {e}", path.display())))?;
        let cell = |col: usize, name: &str| -> Result<&str> {
            match record.get(col) {
                Some(c) if !is_missing(c) => Ok(c.trim()),
                _ => Err(CliError::Data(format!(
                    "row {row}, column `{name}`: missing value"
                ))),
            }
        };
        let number = |col: usize, name: &str| -> Result<f64> {
            let c = cell(col, name)?;
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "row {row}, column `{name}`: `{c}` is not a finite number"
                    ))
                })
        };

        let raw = number(response_col, &config.response)?;
        let y = config.response_transform.apply(raw).ok_or_else(|| {
            CliError::Data(format!(
                "row {row}, column `{}`: {raw} is outside the domain of {}",
                config.response,
                config.response_label()
            ))
        })?;
        response.push(y);
        for ((col, name), out) in covariate_cols
            .iter()
            .zip(&config.numeric_covariates)
            .zip(&mut covariates)
        {
            out.push(number(*col, name)?);
        }
        for (((col, f), map), out) in factor_cols
            .iter()
            .zip(&config.factors)
            .zip(&level_maps)
            .zip(&mut codes)
        {
            let label = cell(*col, &f.column)?;
            let code = map.get(label).ok_or_else(|| {
                CliError::Data(format!(
                    "row {row}, column `{}`: level `{label}` is not in the configured level list",
                    f.column
                ))
            })?;
            out.push(*code);
        }
    }

    let factors = config
        .factors
        .iter()
        .zip(codes)
        .map(|(f, c)| {
            OrderedFactor::new(f.column.clone(), f.levels.clone(), c).map_err(CliError::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        response,
        covariates: config
            .numeric_covariates
            .iter()
            .cloned()
            .zip(covariates)
            .collect(),
        factors,
    })
}
