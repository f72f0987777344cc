//! Unconstrained working parameters for the score maps.
//!
//! Spline knots must satisfy `1 < t_1 < ... < t_m < K` (and likewise for the
//! ordinates). Working values `u_1..u_{m+1}` are turned into positive cell
//! widths `exp(u_i)`, normalised, and accumulated:
//!
//! ```text
//! c_j = sum_{i<=j} exp(u_i) / sum_{i<=m+1} exp(u_i),   t_j = 1 + (K - 1) c_j
//! ```
//!
//! The map is invariant to adding a constant to every `u_i`, so the search
//! fixes `u_{m+1} = 0`. For the g-and-h map, `g` is used as is and
//! `h = softplus(w_h) = ln(1 + exp(w_h))`.

use serde::{Deserialize, Serialize};

use crate::quantile::GHParams;
use crate::spline::SplineScoreParams;
use crate::terms::{FactorTerm, ScoreMapping};
use crate::{Error, Result};

/// Constrained parameters of one score-optimised factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Theta {
    QuantileGh(GHParams),
    Spline(SplineScoreParams),
}

/// Unconstrained parameters of one score-optimised factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WorkingBlock {
    QuantileGh { g: f64, w_h: f64 },
    Spline { u: Vec<f64>, v: Vec<f64> },
}

pub fn softplus(w: f64) -> f64 {
    // ln(1 + e^w) without overflow for large w.
    if w > 0.0 {
        w + (-w).exp().ln_1p()
    } else {
        w.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for `h > 0`.
pub fn inverse_softplus(h: f64) -> f64 {
    if h > 30.0 {
        h + (-(-h).exp()).ln_1p()
    } else {
        h.exp_m1().ln()
    }
}

/// Interior points `1 + (K-1) c_j`, `j = 1..m`, from `m + 1` log cell widths.
pub fn cumulative_knots(logits: &[f64], levels: usize) -> Vec<f64> {
    let shift = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let widths: Vec<f64> = logits.iter().map(|u| (u - shift).exp()).collect();
    let total: f64 = widths.iter().sum();
    let span = (levels - 1) as f64;
    let mut acc = 0.0;
    widths[..widths.len() - 1]
        .iter()
        .map(|w| {
            acc += w;
            1.0 + span * (acc / total)
        })
        .collect()
}

/// Log cell widths relative to the last cell, the inverse of [`cumulative_knots`].
pub fn knot_logits(points: &[f64], levels: usize) -> Vec<f64> {
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(1.0);
    edges.extend_from_slice(points);
    edges.push(levels as f64);
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let last = widths[widths.len() - 1].ln();
    widths.iter().map(|w| w.ln() - last).collect()
}

fn mismatch(term: &FactorTerm, what: &str) -> Error {
    Error::DimensionMismatch(format!(
        "factor `{}` ({}) cannot use {what}",
        term.factor().name(),
        term.mapping().label()
    ))
}

/// Maps a working block to constrained parameters. Spline knots produced here
/// satisfy the ordering constraints except where extreme working values
/// collapse a cell in floating point; [`crate::spline::build_spline`] rejects
/// those.
pub fn to_theta(block: &WorkingBlock, term: &FactorTerm) -> Result<Theta> {
    let levels = term.factor().n_levels();
    match (block, term.mapping()) {
        (WorkingBlock::QuantileGh { g, w_h }, ScoreMapping::QuantileGh) => {
            Ok(Theta::QuantileGh(GHParams {
                g: *g,
                h: softplus(*w_h),
            }))
        }
        (WorkingBlock::Spline { u, v }, ScoreMapping::Spline { knots, method }) => {
            if u.len() != knots + 1 || v.len() != knots + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "spline with {knots} knots needs {} working values per axis, got {} and {}",
                    knots + 1,
                    u.len(),
                    v.len()
                )));
            }
            Ok(Theta::Spline(SplineScoreParams {
                levels,
                t: cumulative_knots(u, levels),
                y: cumulative_knots(v, levels),
                method: *method,
            }))
        }
        (WorkingBlock::QuantileGh { .. }, _) => Err(mismatch(term, "g-and-h parameters")),
        (WorkingBlock::Spline { .. }, _) => Err(mismatch(term, "spline parameters")),
    }
}

/// Canonical working block (last cell logit 0) for constrained parameters.
pub fn from_theta(theta: &Theta) -> Result<WorkingBlock> {
    match theta {
        Theta::QuantileGh(p) => {
            if p.h <= 0.0 {
                return Err(Error::InvalidShape(format!(
                    "h = {} has no working value; softplus only reaches h > 0",
                    p.h
                )));
            }
            Ok(WorkingBlock::QuantileGh {
                g: p.g,
                w_h: inverse_softplus(p.h),
            })
        }
        Theta::Spline(p) => {
            p.validate()?;
            Ok(WorkingBlock::Spline {
                u: knot_logits(&p.t, p.levels),
                v: knot_logits(&p.y, p.levels),
            })
        }
    }
}

/// Number of free search coordinates contributed by a term.
pub fn free_dimension(term: &FactorTerm) -> usize {
    match term.mapping() {
        ScoreMapping::QuantileGh => 2,
        ScoreMapping::Spline { knots, .. } => 2 * knots,
        _ => 0,
    }
}

/// Working blocks for every score-optimised term, in term order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkingParams {
    pub blocks: Vec<WorkingBlock>,
}

impl WorkingParams {
    /// Start point: identity spline (`u = v = 0`), and `g = 0` with
    /// `h = initial_h` for g-and-h terms.
    pub fn start(terms: &[FactorTerm], initial_h: f64) -> Self {
        let blocks = terms
            .iter()
            .filter_map(|t| match t.mapping() {
                ScoreMapping::QuantileGh => Some(WorkingBlock::QuantileGh {
                    g: 0.0,
                    w_h: inverse_softplus(initial_h),
                }),
                ScoreMapping::Spline { knots, .. } => Some(WorkingBlock::Spline {
                    u: vec![0.0; knots + 1],
                    v: vec![0.0; knots + 1],
                }),
                _ => None,
            })
            .collect();
        Self { blocks }
    }

    /// Concatenated search coordinates; the fixed last spline logits are omitted.
    pub fn to_free_vector(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            match b {
                WorkingBlock::QuantileGh { g, w_h } => out.extend([*g, *w_h]),
                WorkingBlock::Spline { u, v } => {
                    let (lu, lv) = (u[u.len() - 1], v[v.len() - 1]);
                    out.extend(u[..u.len() - 1].iter().map(|x| x - lu));
                    out.extend(v[..v.len() - 1].iter().map(|x| x - lv));
                }
            }
        }
        out
    }

    pub fn from_free_vector(terms: &[FactorTerm], free: &[f64]) -> Result<Self> {
        let expected: usize = terms.iter().map(free_dimension).sum();
        if free.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} search coordinates for {expected} free parameters",
                free.len()
            )));
        }
        let mut blocks = Vec::new();
        let mut rest = free;
        for term in terms {
            match term.mapping() {
                ScoreMapping::QuantileGh => {
                    blocks.push(WorkingBlock::QuantileGh {
                        g: rest[0],
                        w_h: rest[1],
                    });
                    rest = &rest[2..];
                }
                ScoreMapping::Spline { knots, .. } => {
                    let m = *knots;
                    let mut u = rest[..m].to_vec();
                    u.push(0.0);
                    let mut v = rest[m..2 * m].to_vec();
                    v.push(0.0);
                    blocks.push(WorkingBlock::Spline { u, v });
                    rest = &rest[2 * m..];
                }
                _ => {}
            }
        }
        Ok(Self { blocks })
    }

    /// Constrained parameters for each score-optimised term.
    pub fn thetas(&self, terms: &[FactorTerm]) -> Result<Vec<Theta>> {
        terms
            .iter()
            .filter(|t| t.is_optimized())
            .zip(&self.blocks)
            .map(|(t, b)| to_theta(b, t))
            .collect()
    }
}
