//! Ordered factors and their baseline encodings.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scores closer than this are treated as tied.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-12;

/// A categorical variable with `K >= 2` ordered levels.
///
/// Codes are zero-based level indices, one per observation. The level order
/// is the order given at construction and is never re-sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedFactor {
    name: String,
    levels: Vec<String>,
    codes: Vec<usize>,
}

impl OrderedFactor {
    pub fn new(name: impl Into<String>, levels: Vec<String>, codes: Vec<usize>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidFactor {
            name: name.clone(),
            reason,
        };
        if levels.len() < 2 {
            return Err(invalid(format!(
                "needs at least 2 levels, got {}",
                levels.len()
            )));
        }
        let mut seen = HashSet::with_capacity(levels.len());
        for level in &levels {
            if !seen.insert(level.as_str()) {
                return Err(invalid(format!("duplicate level label `{level}`")));
            }
        }
        if let Some((i, &c)) = codes.iter().enumerate().find(|(_, &c)| c >= levels.len()) {
            return Err(invalid(format!(
                "observation {i} has level index {c}, but there are only {} levels",
                levels.len()
            )));
        }
        Ok(Self {
            name,
            levels,
            codes,
        })
    }

    /// Builds a factor from raw labels, mapping each to its position in `levels`.
    pub fn from_labels<S: AsRef<str>>(
        name: impl Into<String>,
        levels: Vec<String>,
        labels: &[S],
    ) -> Result<Self> {
        let name = name.into();
        let codes = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let label = label.as_ref();
                levels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| Error::InvalidFactor {
                        name: name.clone(),
                        reason: format!("observation {i} has unknown level `{label}`"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, levels, codes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    /// Number of levels `K`.
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Same factor restricted to the given observations, in that order.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            levels: self.levels.clone(),
            codes: rows.iter().map(|&r| self.codes[r]).collect(),
        }
    }
}

/// Strictly increasing scores `x_1 < ... < x_K`, one per factor level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    /// Fails with [`Error::DegenerateScores`] unless the values are finite and
    /// each exceeds its predecessor by more than [`SCORE_TIE_TOLERANCE`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DegenerateScores(format!(
                "need at least 2 scores, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::DegenerateScores(format!("non-finite score {v}")));
        }
        for (k, w) in values.windows(2).enumerate() {
            if w[1] - w[0] <= SCORE_TIE_TOLERANCE {
                return Err(Error::DegenerateScores(format!(
                    "scores of levels {} and {} are not strictly increasing ({} vs {})",
                    k + 1,
                    k + 2,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Affine rescaling so that the first score is 1 and the last is `K`.
    pub fn standardized(&self) -> Self {
        Self(standardize_to_unit_range(&self.0))
    }
}

impl TryFrom<Vec<f64>> for ScoreVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ScoreVector> for Vec<f64> {
    fn from(s: ScoreVector) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for ScoreVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Maps `r` affinely onto `[1, K]` with `r[0] -> 1` and `r[K-1] -> K` exactly.
/// The caller guarantees `r[K-1] > r[0]`.
pub(crate) fn standardize_to_unit_range(r: &[f64]) -> Vec<f64> {
    let k = r.len();
    let (lo, hi) = (r[0], r[k - 1]);
    let span = (k - 1) as f64;
    let mut out: Vec<f64> = r
        .iter()
        .map(|&v| 1.0 + span * ((v - lo) / (hi - lo)))
        .collect();
    out[0] = 1.0;
    out[k - 1] = k as f64;
    out
}

/// The basic scores `1, 2, ..., K`.
pub fn integer_scores(factor: &OrderedFactor) -> ScoreVector {
    integer_scores_for(factor.n_levels())
}

pub fn integer_scores_for(k: usize) -> ScoreVector {
    ScoreVector((1..=k).map(|v| v as f64).collect())
}

/// Orthonormal polynomial contrasts of degrees `1..=degree` on the equally
/// spaced points `1..K`, as a `K x degree` matrix.
///
/// Column `d` is a degree-`d` polynomial in the level index with positive
/// leading coefficient. Columns are orthonormal and sum to zero. The columns are generated with the three-term recurrence for
/// discrete orthogonal polynomials, which stays well conditioned for large `K`.
pub fn polynomial_contrasts(k: usize, degree: usize) -> Result<DMatrix<f64>> {
    if k < 2 || degree < 1 || degree > k - 1 {
        return Err(Error::InvalidDegree {
            degree,
            max: k.saturating_sub(1),
        });
    }
    let mid = (k as f64 + 1.0) / 2.0;
    let x: Vec<f64> = (1..=k).map(|v| v as f64 - mid).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();

    let mut out = DMatrix::zeros(k, degree);
    let mut prev: Vec<f64> = vec![0.0; k];
    let mut curr: Vec<f64> = vec![1.0; k];
    let mut prev_norm2 = 1.0;
    for d in 0..degree {
        let curr_norm2 = dot(&curr, &curr);
        let xc: Vec<f64> = x.iter().zip(&curr).map(|(a, b)| a * b).collect();
        let a = dot(&xc, &curr) / curr_norm2;
        let b = if d == 0 { 0.0 } else { curr_norm2 / prev_norm2 };
        let next: Vec<f64> = (0..k).map(|i| (x[i] - a) * curr[i] - b * prev[i]).collect();
        let norm = dot(&next, &next).sqrt();
        for (i, v) in next.iter().enumerate() {
            out[(i, d)] = v / norm;
        }
        prev = curr;
        prev_norm2 = curr_norm2;
        curr = next;
    }
    Ok(out)
}

/// Column names for polynomial contrasts, following the usual `.L`, `.Q`,
/// `.C`, `^4`, ... suffixes.
pub fn contrast_names(prefix: &str, degree: usize) -> Vec<String> {
    (1..=degree)
        .map(|d| match d {
            1 => format!("{prefix}.L"),
            2 => format!("{prefix}.Q"),
            3 => format!("{prefix}.C"),
            _ => format!("{prefix}^{d}"),
        })
        .collect()
}

/// Per-observation column `X[i] = scores[codes[i]]`.
pub fn expand_scores(factor: &OrderedFactor, scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() != factor.n_levels() {
        return Err(Error::DimensionMismatch(format!(
            "factor `{}` has {} levels but {} scores were given",
            factor.name(),
            factor.n_levels(),
            scores.len()
        )));
    }
    Ok(factor.codes().iter().map(|&c| scores[c]).collect())
}
