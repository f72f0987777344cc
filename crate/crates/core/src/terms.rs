//! Model specification with its ordered-factor terms.

use serde::{Deserialize, Serialize};

use crate::encoding::{
    contrast_names, expand_scores, polynomial_contrasts, OrderedFactor, ScoreVector,
};
use crate::model::{Design, Family};
use crate::spline::SplineMethod;
use crate::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// How an ordered factor enters the design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScoreMapping {
    /// One column with scores `1..K`.
    IntegerScores,
    /// `degree` orthonormal polynomial contrast columns.
    PolyContrasts { degree: usize },
    /// One column with g-and-h quantile scores; two free parameters.
    QuantileGh,
    /// One column with monotone spline scores; `2 * knots` free parameters.
    Spline { knots: usize, method: SplineMethod },
    /// One column with user-supplied scores.
    Fixed { scores: ScoreVector },
}

impl ScoreMapping {
    pub fn label(&self) -> &'static str {
        match self {
            ScoreMapping::IntegerScores => "integer",
            ScoreMapping::PolyContrasts { .. } => "poly-contrasts",
            ScoreMapping::QuantileGh => "quantile-gh",
            ScoreMapping::Spline { .. } => "spline",
            ScoreMapping::Fixed { .. } => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorTerm {
    factor: OrderedFactor,
    mapping: ScoreMapping,
}

impl FactorTerm {
    pub fn new(factor: OrderedFactor, mapping: ScoreMapping) -> Result<Self> {
        let k = factor.n_levels();
        match &mapping {
            ScoreMapping::QuantileGh | ScoreMapping::Spline { .. } if k < 3 => {
                return Err(Error::TooFewLevels {
                    name: factor.name().to_string(),
                    levels: k,
                });
            }
            ScoreMapping::Spline { knots, .. } if *knots < 1 || *knots > k - 2 => {
                return Err(Error::InvalidKnots(format!(
                    "factor `{}` has {k} levels, so the number of interior knots must be in 1..={}, got {knots}",
                    factor.name(),
                    k - 2
                )));
            }
            ScoreMapping::PolyContrasts { degree } if *degree < 1 || *degree > k - 1 => {
                return Err(Error::InvalidDegree {
                    degree: *degree,
                    max: k - 1,
                });
            }
            ScoreMapping::Fixed { scores } if scores.len() != k => {
                return Err(Error::DimensionMismatch(format!(
                    "factor `{}` has {k} levels but {} fixed scores",
                    factor.name(),
                    scores.len()
                )));
            }
            _ => {}
        }
        Ok(Self { factor, mapping })
    }

    pub fn factor(&self) -> &OrderedFactor {
        &self.factor
    }

    pub fn mapping(&self) -> &ScoreMapping {
        &self.mapping
    }

    /// Whether the scores of this term are estimated.
    pub fn is_optimized(&self) -> bool {
        matches!(
            self.mapping,
            ScoreMapping::QuantileGh | ScoreMapping::Spline { .. }
        )
    }

    /// Whether the term contributes a single score column.
    pub fn is_scored(&self) -> bool {
        !matches!(self.mapping, ScoreMapping::PolyContrasts { .. })
    }

    pub fn score_column_name(&self) -> String {
        format!("{}.score", self.factor.name())
    }
}

/// Everything needed to fit one model apart from the factor scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub response_name: String,
    pub response: Vec<f64>,
    pub covariates: Vec<(String, Vec<f64>)>,
    pub factors: Vec<FactorTerm>,
    pub family: Family,
}

impl ModelSpec {
    pub fn new(
        response_name: impl Into<String>,
        response: Vec<f64>,
        covariates: Vec<(String, Vec<f64>)>,
        factors: Vec<FactorTerm>,
        family: Family,
    ) -> Result<Self> {
        let n = response.len();
        for (name, col) in &covariates {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "covariate `{name}` has {} rows, response has {n}",
                    col.len()
                )));
            }
        }
        for term in &factors {
            if term.factor().len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "factor `{}` has {} rows, response has {n}",
                    term.factor().name(),
                    term.factor().len()
                )));
            }
        }
        Ok(Self {
            response_name: response_name.into(),
            response,
            covariates,
            factors,
            family,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    /// Design matrix for the given per-term scores. `scores[i]` must be
    /// `Some` exactly when term `i` is scored.
    pub fn design(&self, scores: &[Option<ScoreVector>]) -> Result<Design> {
        if scores.len() != self.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} score vectors for {} factor terms",
                scores.len(),
                self.factors.len()
            )));
        }
        let n = self.n_obs();
        let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
        columns.push((INTERCEPT.to_string(), vec![1.0; n]));
        columns.extend(self.covariates.iter().cloned());
        for (term, s) in self.factors.iter().zip(scores) {
            match (term.mapping(), s) {
                (ScoreMapping::PolyContrasts { degree }, _) => {
                    let k = term.factor().n_levels();
                    let contrasts = polynomial_contrasts(k, *degree)?;
                    let names = contrast_names(term.factor().name(), *degree);
                    for (d, name) in names.into_iter().enumerate() {
                        let col: Vec<f64> = (0..k).map(|i| contrasts[(i, d)]).collect();
                        columns.push((name, expand_scores(term.factor(), &col)?));
                    }
                }
                (_, Some(s)) => {
                    columns.push((
                        term.score_column_name(),
                        expand_scores(term.factor(), s.values())?,
                    ));
                }
                (_, None) => {
                    return Err(Error::DimensionMismatch(format!(
                        "no scores supplied for factor `{}`",
                        term.factor().name()
                    )))
                }
            }
        }
        Design::from_columns(columns)
    }
}
