//! Profile search over score parameters.
//!
//! Each candidate `theta` rebuilds the score columns of the optimised factors
//! and refits the inner model. The outer search minimises the resulting
//! criterion over the working parameters of all optimised factors jointly.

use serde::{Deserialize, Serialize};

use crate::encoding::{integer_scores, ScoreVector};
use crate::model::{fit, FitResult};
use crate::quantile::gh_scores;
use crate::simplex::{self, SimplexOptions};
use crate::spline::{build_spline, eval_scores};
use crate::terms::{FactorTerm, ModelSpec, ScoreMapping};
use crate::working::{Theta, WorkingParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub simplex: SimplexOptions,
    /// Run a second simplex search from the incumbent with half the initial step.
    pub restart: bool,
    /// Tail weight `h` of the g-and-h start point.
    pub initial_h: f64,
    /// Also start the simplex from the corners `x0 ± lattice_step` of a
    /// hypercube around the start point. The criterion surface is often
    /// multimodal, with basins in the limit of collapsing cells.
    pub multistart: bool,
    pub lattice_step: f64,
    /// Corners beyond this many are screened by criterion value and only the
    /// best are searched.
    pub max_starts: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            restart: true,
            initial_h: 0.05,
            multistart: true,
            lattice_step: 2.0,
            max_starts: 16,
        }
    }
}

/// Scores of one scored factor term together with where they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorScores {
    pub factor: String,
    pub levels: Vec<String>,
    pub mapping: String,
    pub scores: ScoreVector,
    pub theta: Option<Theta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub dimension: usize,
    pub evaluations: usize,
    /// Simplex searches started in addition to the one from the start point.
    pub starts: usize,
    pub restarts: usize,
    pub converged: bool,
    pub final_spread: f64,
    pub start_criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub fit: FitResult,
    /// One entry per scored term (contrast terms have none), in term order.
    pub scores: Vec<FactorScores>,
    pub thetas: Vec<Theta>,
    pub working: WorkingParams,
    pub diagnostics: SearchDiagnostics,
}

/// Scores of a term for the given constrained parameters. Contrast terms have
/// no scores and yield `None`.
pub fn scores_for(term: &FactorTerm, theta: Option<&Theta>) -> Result<Option<ScoreVector>> {
    let k = term.factor().n_levels();
    let mismatch = || {
        Error::DimensionMismatch(format!(
            "parameters do not match the {} mapping of factor `{}`",
            term.mapping().label(),
            term.factor().name()
        ))
    };
    match (term.mapping(), theta) {
        (ScoreMapping::PolyContrasts { .. }, _) => Ok(None),
        (ScoreMapping::IntegerScores, _) => Ok(Some(integer_scores(term.factor()))),
        (ScoreMapping::Fixed { scores }, _) => Ok(Some(scores.clone())),
        (ScoreMapping::QuantileGh, Some(Theta::QuantileGh(p))) => gh_scores(k, *p).map(Some),
        (ScoreMapping::Spline { .. }, Some(Theta::Spline(p))) => {
            if p.levels != k {
                return Err(mismatch());
            }
            eval_scores(&build_spline(p)?, k).map(Some)
        }
        _ => Err(mismatch()),
    }
}

/// Evaluates the model at the given working parameters.
fn evaluate(
    model: &ModelSpec,
    working: &WorkingParams,
) -> Result<(FitResult, Vec<Option<ScoreVector>>, Vec<Theta>)> {
    let thetas = working.thetas(&model.factors)?;
    let mut optimized = thetas.iter();
    let scores = model
        .factors
        .iter()
        .map(|term| {
            let theta = if term.is_optimized() {
                optimized.next()
            } else {
                None
            };
            scores_for(term, theta)
        })
        .collect::<Result<Vec<_>>>()?;
    let design = model.design(&scores)?;
    let fit = fit(&design, &model.response, model.family)?;
    Ok((fit, scores, thetas))
}

/// Criterion at the given search coordinates, `+inf` where the scores are
/// degenerate or the inner fit fails.
pub fn profile_criterion(model: &ModelSpec, free: &[f64]) -> f64 {
    WorkingParams::from_free_vector(&model.factors, free)
        .and_then(|w| evaluate(model, &w))
        .map(|(fit, _, _)| fit.criterion)
        .unwrap_or(f64::INFINITY)
}

/// Largest dimension for which the corner lattice is enumerated.
const MAX_LATTICE_DIMENSION: usize = 12;

/// Extra start points: hypercube corners around `x0`, screened down to the
/// best `max_starts` when there are more. Ordering is deterministic.
fn lattice_starts<F>(
    objective: &F,
    x0: &[f64],
    options: &OptimizerOptions,
) -> (Vec<Vec<f64>>, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    if !options.multistart || d == 0 || d > MAX_LATTICE_DIMENSION || options.max_starts == 0 {
        return (Vec::new(), 0);
    }
    let corners: Vec<Vec<f64>> = (0..1usize << d)
        .map(|bits| {
            x0.iter()
                .enumerate()
                .map(|(i, x)| {
                    if bits >> i & 1 == 0 {
                        x - options.lattice_step
                    } else {
                        x + options.lattice_step
                    }
                })
                .collect()
        })
        .collect();
    if corners.len() <= options.max_starts {
        return (corners, 0);
    }
    let mut screened: Vec<(f64, usize)> = corners
        .iter()
        .enumerate()
        .map(|(i, c)| (objective(c), i))
        .filter(|(v, _)| v.is_finite())
        .collect();
    let evaluations = corners.len();
    screened.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let starts = screened
        .into_iter()
        .take(options.max_starts)
        .map(|(_, i)| corners[i].clone())
        .collect();
    (starts, evaluations)
}

/// Fits the model with every score-optimised factor's parameters chosen to
/// minimise the criterion.
///
/// The search starts from the identity spline / near-normal g-and-h point and,
/// unless disabled, from a lattice around it; the best result is refined by
/// one restart with half the step. The returned criterion is never above the
/// start criterion. A failure of the inner fit at the start point is returned
/// as an error; later failures only reject the candidate.
pub fn optimize(model: &ModelSpec, options: &OptimizerOptions) -> Result<OptimizeOutcome> {
    let start = WorkingParams::start(&model.factors, options.initial_h);
    let (start_fit, _, _) = evaluate(model, &start)?;
    let x0 = start.to_free_vector();
    let dimension = x0.len();

    let mut diagnostics = SearchDiagnostics {
        dimension,
        evaluations: 1,
        starts: 0,
        restarts: 0,
        converged: true,
        final_spread: 0.0,
        start_criterion: start_fit.criterion,
    };

    let best = if dimension == 0 {
        x0
    } else {
        let objective = |x: &[f64]| profile_criterion(model, x);
        let mut result = simplex::minimize(objective, &x0, &options.simplex);
        diagnostics.evaluations += result.evaluations;
        let (starts, screening) = lattice_starts(&objective, &x0, options);
        diagnostics.evaluations += screening;
        diagnostics.starts += starts.len();
        for start in &starts {
            let candidate = simplex::minimize(objective, start, &options.simplex);
            diagnostics.evaluations += candidate.evaluations;
            if candidate.value < result.value {
                result = candidate;
            }
        }
        if options.restart {
            let restart_opts = SimplexOptions {
                initial_step: options.simplex.initial_step / 2.0,
                ..options.simplex
            };
            let again = simplex::minimize(objective, &result.x, &restart_opts);
            diagnostics.evaluations += again.evaluations;
            diagnostics.restarts = 1;
            if again.value <= result.value {
                result = again;
            }
        }
        diagnostics.converged = result.converged;
        diagnostics.final_spread = result.spread;
        result.x
    };

    let working = WorkingParams::from_free_vector(&model.factors, &best)?;
    let (fit, scores, thetas) = evaluate(model, &working)?;
    let mut theta_iter = thetas.iter();
    let scores = model
        .factors
        .iter()
        .zip(scores)
        .filter_map(|(term, s)| {
            let theta = term
                .is_optimized()
                .then(|| theta_iter.next().cloned())
                .flatten();
            s.map(|scores| FactorScores {
                factor: term.factor().name().to_string(),
                levels: term.factor().levels().to_vec(),
                mapping: term.mapping().label().to_string(),
                scores,
                theta,
            })
        })
        .collect();
    Ok(OptimizeOutcome {
        fit,
        scores,
        thetas,
        working,
        diagnostics,
    })
}
