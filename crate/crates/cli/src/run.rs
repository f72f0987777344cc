//! One end-to-end run, from CSV to output files.

use std::path::{Path, PathBuf};

use ordscore::compare::{run_variant, ComparisonReport, EncodingPlan, FactorPlan, Variant};
use ordscore::encoding::ScoreVector;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::{load_dataset, Dataset};
use crate::error::{CliError, Result};
use crate::output::{render, Rendered, ScoresFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Compare,
    Baseline,
    Quantile,
    Spline,
}

impl Mode {
    pub fn variants(self) -> &'static [Variant] {
        match self {
            Mode::Compare => &Variant::ALL,
            Mode::Baseline => &[Variant::Baseline],
            Mode::Quantile => &[Variant::Quantile],
            Mode::Spline => &[Variant::Spline],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Compare => "compare",
            Mode::Baseline => "baseline",
            Mode::Quantile => "quantile",
            Mode::Spline => "spline",
        }
    }
}

/// Builds the encoding plan for a loaded dataset.
pub fn plan(config: &RunConfig, data: &Dataset) -> Result<EncodingPlan> {
    let factors = config
        .factors
        .iter()
        .zip(&data.factors)
        .map(|(f, factor)| {
            let fixed_scores = f
                .scores
                .clone()
                .map(ScoreVector::new)
                .transpose()
                .map_err(|e| CliError::Config(format!("scores of factor `{}`: {e}", f.column)))?;
            Ok(FactorPlan {
                factor: factor.clone(),
                contrast_degree: f.contrast_degree,
                scored: f.scored,
                spline_knots: f.spline_knots,
                spline_method: f.spline_method,
                fixed_scores,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodingPlan {
        response_name: config.response_label(),
        response: data.response.clone(),
        covariates: data.covariates.clone(),
        factors,
        family: config.family,
    })
}

/// Fits the variants of `mode`, in order.
pub fn fit_variants(config: &RunConfig, data: &Dataset, mode: Mode) -> Result<ComparisonReport> {
    let plan = plan(config, data)?;
    let variants = mode
        .variants()
        .iter()
        .map(|&v| run_variant(&plan, v, &config.optimizer).map_err(CliError::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { variants })
}

/// Replaces the scores of the factors found in a `scores.json` written by an
/// earlier run, so the scored variant of `mode` refits with them.
pub fn apply_scores_file(config: &mut RunConfig, path: &Path, mode: Mode) -> Result<()> {
    let wanted = match mode {
        Mode::Quantile => Variant::Quantile,
        Mode::Spline => Variant::Spline,
        _ => {
            return Err(CliError::Config(
                "fixed scores from a file need --mode quantile or --mode spline".into(),
            ))
        }
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ScoresFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let entry = match file.variants.iter().find(|v| v.variant == wanted) {
        Some(e) => e,
        None if file.variants.len() == 1 => &file.variants[0],
        None => {
            return Err(CliError::Config(format!(
                "{} has no scores for the {wanted} variant",
                path.display()
            )))
        }
    };
    for scores in &entry.factors {
        let f = config
            .factors
            .iter_mut()
            .find(|f| f.column == scores.factor)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "scores file names unknown factor `{}`",
                    scores.factor
                ))
            })?;
        if f.levels != scores.levels {
            return Err(CliError::Config(format!(
                "levels of factor `{}` in the scores file differ from the config",
                f.column
            )));
        }
        f.scores = Some(scores.scores.values().to_vec());
    }
    Ok(())
}

pub const OUTPUT_FILES: [&str; 4] = ["summary.txt", "scores.json", "plot_data.csv", "report.json"];

pub fn write_outputs(dir: &Path, rendered: &Rendered) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let contents = [
        &rendered.summary,
        &rendered.scores_json,
        &rendered.plot_csv,
        &rendered.report_json,
    ];
    OUTPUT_FILES
        .iter()
        .zip(contents)
        .map(|(name, text)| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Runs `config` end to end and writes the output files.
pub fn run(config: &RunConfig, mode: Mode) -> Result<Rendered> {
    let data = load_dataset(&config.data, config)?;
    let report = fit_variants(config, &data, mode)?;
    let rendered = render(config, mode, &data, &report)?;
    write_outputs(&config.output_dir, &rendered)?;
    Ok(rendered)
}
