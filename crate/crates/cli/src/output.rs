//! Rendering of the four output files.

use std::fmt::Write as _;

use ordscore::compare::{ComparisonReport, Variant, VariantReport};
use ordscore::model::FitResult;
use ordscore::optimizer::{FactorScores, SearchDiagnostics};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::data::Dataset;
use crate::error::{CliError, Result};
use crate::run::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub summary: String,
    pub scores_json: String,
    pub plot_csv: String,
    pub report_json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantScores {
    pub variant: Variant,
    pub factors: Vec<FactorScores>,
}

/// Contents of `scores.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub schema: u32,
    pub variants: Vec<VariantScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// t (Gaussian) or z statistic.
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub criterion: f64,
    pub df_residual: usize,
    pub residual_sd: Option<f64>,
    pub irls_iterations: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub scores: Vec<FactorScores>,
    pub search: SearchDiagnostics,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: u32,
    pub mode: Mode,
    pub seed: u64,
    pub data: String,
    pub response: String,
    pub family: ordscore::model::Family,
    pub observations: usize,
    pub variants: Vec<VariantSummary>,
}

fn coefficient_rows(fit: &FitResult) -> Vec<CoefficientRow> {
    (0..fit.names.len())
        .map(|i| CoefficientRow {
            name: fit.names[i].clone(),
            estimate: fit.coefficients[i],
            std_error: fit.std_errors[i],
            statistic: fit.t_values[i],
            p_value: fit.p_values[i],
        })
        .collect()
}

/// The coefficient table: estimates to 3 decimals, the rest to 2.
pub fn coefficient_table(fit: &FitResult) -> String {
    let stat = if fit.family.estimates_dispersion() {
        "t"
    } else {
        "z"
    };
    let header = [
        String::new(),
        "Estimate".to_string(),
        "Std. Error".to_string(),
        format!("{stat} value"),
        format!("Pr(>|{stat}|)"),
    ];
    let rows: Vec<[String; 5]> = coefficient_rows(fit)
        .into_iter()
        .map(|r| {
            [
                r.name,
                format!("{:.3}", r.estimate),
                format!("{:.2}", r.std_error),
                format!("{:.2}", r.statistic),
                format!("{:.2}", r.p_value),
            ]
        })
        .collect();
    let mut widths = header.clone().map(|h| h.len());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
        for (cell, w) in row[1..].iter().zip(&widths[1..]) {
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

fn fit_footer(fit: &FitResult) -> String {
    match fit.residual_sd {
        Some(sd) => format!(
            "Residual standard deviation: {sd:.2} on {} degrees of freedom\n",
            fit.df_residual
        ),
        None => format!(
            "Residual deviance: {:.2} on {} degrees of freedom\n",
            fit.criterion, fit.df_residual
        ),
    }
}

fn variant_title(variant: Variant) -> &'static str {
    match variant {
        Variant::Baseline => "baseline: polynomial contrasts",
        Variant::Quantile => "quantile: g-and-h scores",
        Variant::Spline => "spline: monotone spline scores",
    }
}

fn variant_block(config: &RunConfig, data: &Dataset, report: &VariantReport) -> String {
    let outcome = &report.outcome;
    let fit = &outcome.fit;
    let mut out = String::new();
    let _ = writeln!(out, "== {} ==", variant_title(report.variant));
    let _ = writeln!(
        out,
        "Response: {}  Family: {}  Observations: {}\n",
        config.response_label(),
        config.family,
        data.n_rows()
    );
    out.push_str(&coefficient_table(fit));
    out.push_str(&fit_footer(fit));
    for s in &outcome.scores {
        let _ = writeln!(out, "\nScores for {} ({}):", s.factor, s.mapping);
        for (level, x) in s.levels.iter().zip(s.scores.values()) {
            let _ = writeln!(out, "  {level:<12} {x:.3}");
        }
    }
    let d = &outcome.diagnostics;
    if d.dimension > 0 {
        let _ = writeln!(
            out,
            "\nSearch: {} parameters, {} evaluations, {}, start criterion {:.4}, final {:.4}",
            d.dimension,
            d.evaluations,
            if d.converged {
                "converged"
            } else {
                "evaluation budget reached"
            },
            d.start_criterion,
            fit.criterion
        );
    }
    out
}

pub fn render(
    config: &RunConfig,
    mode: Mode,
    data: &Dataset,
    report: &ComparisonReport,
) -> Result<Rendered> {
    let summary = report
        .variants
        .iter()
        .map(|v| variant_block(config, data, v))
        .collect::<Vec<_>>()
        .join("\n");

    let scores = ScoresFile {
        schema: SCHEMA_VERSION,
        variants: report
            .variants
            .iter()
            .filter(|v| !v.outcome.scores.is_empty())
            .map(|v| VariantScores {
                variant: v.variant,
                factors: v.outcome.scores.clone(),
            })
            .collect(),
    };

    let mut plot = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Numerical(format!("writing plot data: {e}"));
    plot.write_record(["variant", "factor", "level_index", "level", "score"])
        .map_err(csv_err)?;
    for v in &scores.variants {
        for f in &v.factors {
            for (i, (level, x)) in f.levels.iter().zip(f.scores.values()).enumerate() {
                plot.write_record([
                    v.variant.name(),
                    &f.factor,
                    &(i + 1).to_string(),
                    level,
                    &x.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    let plot_csv = String::from_utf8(
        plot.into_inner()
            .map_err(|e| CliError::Numerical(e.to_string()))?,
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;

    let report_file = ReportFile {
        schema: SCHEMA_VERSION,
        mode,
        seed: config.seed,
        data: config.data.display().to_string(),
        response: config.response_label(),
        family: config.family,
        observations: data.n_rows(),
        variants: report
            .variants
            .iter()
            .map(|v| VariantSummary {
                variant: v.variant,
                criterion: v.outcome.fit.criterion,
                df_residual: v.outcome.fit.df_residual,
                residual_sd: v.outcome.fit.residual_sd,
                irls_iterations: v.outcome.fit.iterations,
                coefficients: coefficient_rows(&v.outcome.fit),
                scores: v.outcome.scores.clone(),
                search: v.outcome.diagnostics.clone(),
            })
            .collect(),
    };

    Ok(Rendered {
        summary,
        scores_json: pretty_json(&scores)?,
        plot_csv,
        report_json: pretty_json(&report_file)?,
    })
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
    text.push('\n');
    Ok(text)
}
