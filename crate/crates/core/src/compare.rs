//! Side-by-side fits of the same model under each factor encoding.

use serde::{Deserialize, Serialize};

use crate::encoding::{OrderedFactor, ScoreVector};
use crate::model::Family;
use crate::optimizer::{optimize, OptimizeOutcome, OptimizerOptions};
use crate::spline::SplineMethod;
use crate::terms::{FactorTerm, ModelSpec, ScoreMapping};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Baseline,
    Quantile,
    Spline,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Baseline, Variant::Quantile, Variant::Spline];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Quantile => "quantile",
            Variant::Spline => "spline",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How one ordered factor is encoded under each variant.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPlan {
    pub factor: OrderedFactor,
    /// Contrast degree used by the baseline, and by the other variants when
    /// the factor is not scored.
    pub contrast_degree: usize,
    /// Whether the quantile and spline variants replace the contrasts by scores.
    pub scored: bool,
    pub spline_knots: usize,
    pub spline_method: SplineMethod,
    /// Known scores; scored variants then refit with these instead of searching.
    pub fixed_scores: Option<ScoreVector>,
}

impl FactorPlan {
    fn term(&self, variant: Variant) -> Result<FactorTerm> {
        let mapping = match (variant, self.scored, &self.fixed_scores) {
            (Variant::Baseline, _, _) | (_, false, _) => ScoreMapping::PolyContrasts {
                degree: self.contrast_degree,
            },
            (_, true, Some(scores)) => ScoreMapping::Fixed {
                scores: scores.clone(),
            },
            (Variant::Quantile, true, None) => ScoreMapping::QuantileGh,
            (Variant::Spline, true, None) => ScoreMapping::Spline {
                knots: self.spline_knots,
                method: self.spline_method,
            },
        };
        FactorTerm::new(self.factor.clone(), mapping)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingPlan {
    pub response_name: String,
    pub response: Vec<f64>,
    pub covariates: Vec<(String, Vec<f64>)>,
    pub factors: Vec<FactorPlan>,
    pub family: Family,
}

impl EncodingPlan {
    pub fn model_for(&self, variant: Variant) -> Result<ModelSpec> {
        let terms = self
            .factors
            .iter()
            .map(|f| f.term(variant))
            .collect::<Result<Vec<_>>>()?;
        ModelSpec::new(
            self.response_name.clone(),
            self.response.clone(),
            self.covariates.clone(),
            terms,
            self.family,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub outcome: OptimizeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub variants: Vec<VariantReport>,
}

impl ComparisonReport {
    pub fn get(&self, variant: Variant) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

pub fn run_variant(
    plan: &EncodingPlan,
    variant: Variant,
    options: &OptimizerOptions,
) -> Result<VariantReport> {
    let model = plan.model_for(variant)?;
    Ok(VariantReport {
        variant,
        outcome: optimize(&model, options)?,
    })
}

/// Fits every variant, baseline first.
pub fn compare_encodings(
    plan: &EncodingPlan,
    options: &OptimizerOptions,
) -> Result<ComparisonReport> {
    let variants = Variant::ALL
        .iter()
        .map(|&v| run_variant(plan, v, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { variants })
}
