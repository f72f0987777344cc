//! Monotone cubic Hermite interpolation through pinned corner knots.
//!
//! A spline score map passes through `(1, 1)`, the interior knots
//! `(t_1, y_1), ..., (t_m, y_m)` and `(K, K)`, with
//! `1 < t_1 < ... < t_m < K` and `1 < y_1 < ... < y_m < K`. Tangents are
//! chosen so the piecewise cubic is nondecreasing, using either the
//! Fritsch–Carlson limiter or the Hyman filter.

use serde::{Deserialize, Serialize};

use crate::encoding::ScoreVector;
use crate::{Error, Result};

/// Radius of the Fritsch–Carlson monotonicity disc, `alpha^2 + beta^2 <= 9`.
const FC_RADIUS_SQUARED: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplineMethod {
    #[default]
    FritschCarlson,
    Hyman,
}

impl std::fmt::Display for SplineMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplineMethod::FritschCarlson => f.write_str("fritsch-carlson"),
            SplineMethod::Hyman => f.write_str("hyman"),
        }
    }
}

/// Interior knots of a spline score map for a factor with `K` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineScoreParams {
    pub levels: usize,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub method: SplineMethod,
}

impl SplineScoreParams {
    pub fn new(levels: usize, t: Vec<f64>, y: Vec<f64>, method: SplineMethod) -> Result<Self> {
        let params = Self {
            levels,
            t,
            y,
            method,
        };
        params.validate()?;
        Ok(params)
    }

    /// Number of interior knots `m`.
    pub fn n_knots(&self) -> usize {
        self.t.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.levels as f64;
        if self.levels < 3 {
            return Err(Error::InvalidKnots(format!(
                "need K >= 3, got {}",
                self.levels
            )));
        }
        if self.t.is_empty() || self.t.len() != self.y.len() {
            return Err(Error::InvalidKnots(format!(
                "need m >= 1 abscissae and ordinates of equal length, got {} and {}",
                self.t.len(),
                self.y.len()
            )));
        }
        for (what, v) in [("abscissae", &self.t), ("ordinates", &self.y)] {
            let chain = std::iter::once(1.0)
                .chain(v.iter().copied())
                .chain(std::iter::once(k))
                .collect::<Vec<_>>();
            if chain.iter().any(|x| !x.is_finite()) || chain.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidKnots(format!(
                    "{what} {v:?} must satisfy 1 < v_1 < ... < v_m < {k}"
                )));
            }
        }
        Ok(())
    }
}

/// A `C^1` piecewise cubic Hermite interpolant on `[x_0, x_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn knots_x(&self) -> &[f64] {
        &self.x
    }

    pub fn knots_y(&self) -> &[f64] {
        &self.y
    }

    pub fn tangents(&self) -> &[f64] {
        &self.d
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, u: f64) -> usize {
        let n = self.x.len();
        self.x[1..n - 1].partition_point(|&xi| xi <= u)
    }

    /// Value at `u`; arguments outside the domain are clamped to it.
    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.domain();
        let u = u.clamp(lo, hi);
        let i = self.segment(u);
        let h = self.x[i + 1] - self.x[i];
        let s = (u - self.x[i]) / h;
        // Endpoints are returned exactly.
        if s == 0.0 {
            return self.y[i];
        }
        if s == 1.0 {
            return self.y[i + 1];
        }
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    /// First derivative at `u`, taken from the segment containing `u`.
    pub fn derivative(&self, u: f64) -> f64 {
        let (lo, hi) = self.domain();
        let u = u.clamp(lo, hi);
        let i = self.segment(u);
        let h = self.x[i + 1] - self.x[i];
        let s = (u - self.x[i]) / h;
        let s2 = s * s;
        let dy = (self.y[i + 1] - self.y[i]) / h;
        (6.0 * s2 - 6.0 * s) * dy
            + (3.0 * s2 - 4.0 * s + 1.0) * self.d[i]
            + (3.0 * s2 - 2.0 * s) * self.d[i + 1]
    }
}

/// Builds the monotone interpolant through `(1,1), (t_j, y_j), (K,K)`.
pub fn build_spline(params: &SplineScoreParams) -> Result<MonotoneCubic> {
    params.validate()?;
    let k = params.levels as f64;
    let mut x = Vec::with_capacity(params.t.len() + 2);
    x.push(1.0);
    x.extend_from_slice(&params.t);
    x.push(k);
    let mut y = Vec::with_capacity(x.len());
    y.push(1.0);
    y.extend_from_slice(&params.y);
    y.push(k);
    let d = match params.method {
        SplineMethod::FritschCarlson => fritsch_carlson_tangents(&x, &y),
        SplineMethod::Hyman => hyman_tangents(&x, &y),
    };
    Ok(MonotoneCubic { x, y, d })
}

/// Scores `(s(1), ..., s(K))`; `s(1) = 1` and `s(K) = K` exactly.
pub fn eval_scores(spline: &MonotoneCubic, levels: usize) -> Result<ScoreVector> {
    let mut values: Vec<f64> = (1..=levels).map(|k| spline.eval(k as f64)).collect();
    values[0] = spline.y[0];
    values[levels - 1] = spline.y[spline.y.len() - 1];
    ScoreVector::new(values)
}

fn secants(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta = y
        .windows(2)
        .zip(&h)
        .map(|(w, hi)| (w[1] - w[0]) / hi)
        .collect();
    (h, delta)
}

/// One-sided three-point endpoint tangent with the usual shape-preserving
/// adjustments. `h0, d0` belong to the end interval, `h1, d1` to its neighbour.
fn endpoint_tangent(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let t = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if t.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && t.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        t
    }
}

pub(crate) fn fritsch_carlson_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let (h, delta) = secants(x, y);
    let mut d = vec![0.0; n];

    // Weighted harmonic mean of adjacent secants at interior knots.
    for i in 1..n - 1 {
        let (s0, s1) = (delta[i - 1], delta[i]);
        if s0 * s1 <= 0.0 {
            d[i] = 0.0;
        } else {
            let w0 = 2.0 * h[i] + h[i - 1];
            let w1 = h[i] + 2.0 * h[i - 1];
            d[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
        }
    }
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = endpoint_tangent(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = endpoint_tangent(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        d[i] = d[i].max(0.0);
        d[i + 1] = d[i + 1].max(0.0);
        let alpha = d[i] / delta[i];
        let beta = d[i + 1] / delta[i];
        let r2 = alpha * alpha + beta * beta;
        if r2 > FC_RADIUS_SQUARED {
            let tau = 3.0 / r2.sqrt();
            d[i] = tau * alpha * delta[i];
            d[i + 1] = tau * beta * delta[i];
        }
    }
    d
}

pub(crate) fn hyman_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let (h, delta) = secants(x, y);
    let mut d = vec![0.0; n];

    // Three-point (parabolic) estimate.
    for i in 1..n - 1 {
        d[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    }
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        d[n - 1] = ((2.0 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3])
            / (h[n - 2] + h[n - 3]);
    }

    // Filter for increasing data: 0 <= d_i <= 3 min(adjacent secants).
    for i in 0..n {
        let left = if i > 0 { delta[i - 1] } else { f64::INFINITY };
        let right = if i < n - 1 { delta[i] } else { f64::INFINITY };
        let cap = 3.0 * left.min(right);
        d[i] = d[i].max(0.0).min(cap.max(0.0));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const METHODS: [SplineMethod; 2] = [SplineMethod::FritschCarlson, SplineMethod::Hyman];

    fn spline(k: usize, t: &[f64], y: &[f64], method: SplineMethod) -> MonotoneCubic {
        let p = SplineScoreParams::new(k, t.to_vec(), y.to_vec(), method).unwrap();
        build_spline(&p).unwrap()
    }

    #[test]
    fn collinear_knots_give_identity() {
        for method in METHODS {
            let s = spline(5, &[2.0, 4.0], &[2.0, 4.0], method);
            for d in s.tangents() {
                assert_abs_diff_eq!(*d, 1.0, epsilon = 1e-15);
            }
            for i in 0..=400 {
                let u = 1.0 + i as f64 * 0.01;
                assert_abs_diff_eq!(s.eval(u), u, epsilon = 1e-12);
            }
            for (a, b) in eval_scores(&s, 5).unwrap().values().iter().zip(1..=5) {
                assert_abs_diff_eq!(*a, b as f64, epsilon = 1e-12);
            }
        }
        let s = spline(4, &[2.5], &[2.5], SplineMethod::FritschCarlson);
        for (a, b) in eval_scores(&s, 4).unwrap().values().iter().zip(1..=4) {
            assert_abs_diff_eq!(*a, b as f64, epsilon = 1e-12);
        }
    }

    // Reference values from SciPy's PchipInterpolator on the same knots; the
    // Fritsch-Carlson disc is inactive for these data, so the two coincide.
    #[test]
    fn fritsch_carlson_matches_reference_pchip() {
        let s = spline(5, &[3.0], &[2.0], SplineMethod::FritschCarlson);
        let scores = eval_scores(&s, 5).unwrap();
        let expected = [1.0, 1.3125, 2.0, 3.1875, 5.0];
        for (a, b) in scores.values().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        for (u, v) in [
            (1.5, 1.0859375),
            (2.5, 1.6328125),
            (3.7, 2.7485625),
            (4.9, 4.8013125),
        ] {
            assert_abs_diff_eq!(s.eval(u), v, epsilon = 1e-12);
        }
        for (a, b) in s.tangents().iter().zip([0.0, 0.75, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }

        let s = spline(6, &[2.2, 3.1], &[1.5, 5.2], SplineMethod::FritschCarlson);
        let expected = [
            1.0, 1.2492781, 3.46674737, 5.42299992, 5.75978722, 5.94400473, 6.0,
        ];
        for (i, v) in expected.iter().enumerate() {
            let u = 1.0 + 5.0 * i as f64 / 6.0;
            assert_abs_diff_eq!(s.eval(u), *v, epsilon = 1e-8);
        }
    }

    #[test]
    fn single_knot_scores_bracket_the_knot() {
        for method in METHODS {
            let s = spline(5, &[3.0], &[2.0], method);
            let x = eval_scores(&s, 5).unwrap();
            let x = x.values();
            assert_eq!((x[0], x[2], x[4]), (1.0, 2.0, 5.0));
            assert!(x[1] > 1.0 && x[1] < 2.0);
            assert!(x[3] > 2.0 && x[3] < 5.0);
        }
    }

    #[test]
    fn near_flat_pair_has_near_zero_tangents() {
        for method in METHODS {
            let s = spline(6, &[2.0, 3.0, 4.0], &[3.0, 3.0 + 1e-12, 4.0], method);
            assert!(s.tangents()[1] < 1e-10, "{method}: {:?}", s.tangents());
            assert!(s.tangents()[2] < 1e-10, "{method}: {:?}", s.tangents());
        }
    }

    #[test]
    fn fritsch_carlson_rescales_into_disc() {
        // Steep middle interval between two shallow ones.
        let s = spline(4, &[1.1, 3.9], &[1.01, 3.99], SplineMethod::FritschCarlson);
        let (x, y, d) = (s.knots_x(), s.knots_y(), s.tangents());
        for i in 0..x.len() - 1 {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            let (a, b) = (d[i] / delta, d[i + 1] / delta);
            assert!(a >= 0.0 && b >= 0.0);
            assert!(a * a + b * b <= 9.0 + 1e-12);
        }
    }

    #[test]
    fn invalid_knots_are_rejected() {
        let bad = [
            (5, vec![3.0], vec![5.0]),
            (5, vec![1.0], vec![2.0]),
            (5, vec![3.0, 2.0], vec![2.0, 3.0]),
            (5, vec![2.0, 3.0], vec![2.0, 2.0]),
            (5, vec![], vec![]),
            (5, vec![2.0], vec![2.0, 3.0]),
            (2, vec![1.5], vec![1.5]),
            (5, vec![f64::NAN], vec![2.0]),
        ];
        for (k, t, y) in bad {
            assert!(matches!(
                SplineScoreParams::new(k, t, y, SplineMethod::FritschCarlson),
                Err(Error::InvalidKnots(_))
            ));
        }
    }

    #[test]
    fn derivative_matches_tangents_at_knots() {
        let s = spline(7, &[2.3, 4.1, 5.5], &[1.4, 5.0, 6.2], SplineMethod::Hyman);
        for (x, d) in s.knots_x().iter().zip(s.tangents()) {
            assert_abs_diff_eq!(s.derivative(*x), *d, epsilon = 1e-12);
        }
    }
}
