#![allow(dead_code)]

use ordscore::encoding::OrderedFactor;
use ordscore::model::{fit_glm, fit_ols, Design, Family};
use ordscore::optimizer::scores_for;
use ordscore::quantile::{gh_quantile, gh_scores, gh_transform, GHParams};
use ordscore::spline::{build_spline, MonotoneCubic, SplineMethod, SplineScoreParams};
use ordscore::terms::{FactorTerm, ModelSpec, ScoreMapping};
use ordscore::working::{cumulative_knots, to_theta, WorkingBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const TRUE_SCORES: [f64; 5] = [1.0, 1.2, 3.0, 4.6, 5.0];
pub const SLOPE: f64 = 2.0;
pub const INTERCEPT: f64 = 3.0;

/// One factor with balanced levels and `y = 3 + 2 x_true + N(0, sigma^2)`.
pub fn synthetic(seed: u64, n: usize, truth: &[f64], sigma: f64) -> (OrderedFactor, Vec<f64>) {
    let k = truth.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let codes: Vec<usize> = (0..n).map(|i| i % k).collect();
    let y = codes
        .iter()
        .map(|&c| INTERCEPT + SLOPE * truth[c] + noise.sample(&mut rng))
        .collect();
    let levels = (1..=k).map(|i| format!("level{i}")).collect();
    (OrderedFactor::new("f", levels, codes).unwrap(), y)
}

pub fn spline_model(factor: OrderedFactor, y: Vec<f64>, knots: usize) -> ModelSpec {
    let term = FactorTerm::new(
        factor,
        ScoreMapping::Spline {
            knots,
            method: SplineMethod::FritschCarlson,
        },
    )
    .unwrap();
    ModelSpec::new("y", y, vec![], vec![term], Family::Gaussian).unwrap()
}

/// Per-level sufficient statistics for the closed-form RSS of `y ~ 1 + x[code]`.
pub struct LevelStats {
    n: Vec<f64>,
    sum: Vec<f64>,
    total: f64,
    total_sq: f64,
    count: f64,
}

impl LevelStats {
    pub fn new(codes: &[usize], y: &[f64], k: usize) -> Self {
        let mut n = vec![0.0; k];
        let mut sum = vec![0.0; k];
        for (&c, &v) in codes.iter().zip(y) {
            n[c] += 1.0;
            sum[c] += v;
        }
        Self {
            n,
            sum,
            total: y.iter().sum(),
            total_sq: y.iter().map(|v| v * v).sum(),
            count: y.len() as f64,
        }
    }

    pub fn rss(&self, x: &[f64]) -> f64 {
        let sx: f64 = self.n.iter().zip(x).map(|(n, x)| n * x).sum();
        let sxx: f64 = self.n.iter().zip(x).map(|(n, x)| n * x * x).sum();
        let sxy: f64 = self.sum.iter().zip(x).map(|(s, x)| s * x).sum();
        let cxx = sxx - sx * sx / self.count;
        let cxy = sxy - sx * self.total / self.count;
        let cyy = self.total_sq - self.total * self.total / self.count;
        cyy - cxy * cxy / cxx
    }
}

pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// A random valid parameter set. Even draws place knots uniformly; odd draws
/// go through the working map with wide logits, which produces very uneven
/// cells.
pub fn random_spline_params(
    rng: &mut ChaCha8Rng,
    draw: usize,
    method: SplineMethod,
) -> SplineScoreParams {
    let k = rng.random_range(3..=10usize);
    let m = rng.random_range(1..=k - 2);
    if draw.is_multiple_of(2) {
        let sorted = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..k as f64)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let t = sorted(rng);
        let y = sorted(rng);
        if let Ok(p) = SplineScoreParams::new(k, t, y, method) {
            return p;
        }
    }
    let logits = Normal::new(0.0, 2.0).unwrap();
    let block = |rng: &mut ChaCha8Rng| {
        let mut w: Vec<f64> = (0..m).map(|_| logits.sample(rng)).collect();
        w.push(0.0);
        w
    };
    let t = cumulative_knots(&block(rng), k);
    let y = cumulative_knots(&block(rng), k);
    SplineScoreParams::new(k, t, y, method).expect("working map yields valid knots")
}

/// Worst cases over a batch of random splines.
#[derive(Debug, Default, Clone, Copy)]
pub struct SplineReport {
    pub draws: usize,
    pub knot_error: f64,
    /// Largest decrease between successive points of the 1e-3 grid.
    pub monotone_drop: f64,
    /// Largest relative mismatch of left and right derivative estimates at
    /// interior knots.
    pub c1_mismatch: f64,
    pub identity_error: f64,
}

/// Left and right difference quotients at `t`. The four-point stencils are
/// exact for cubics, so only rounding error remains inside each piece.
fn one_sided(s: &MonotoneCubic, t: f64, h: f64) -> (f64, f64) {
    let f = |u: f64| s.eval(u);
    let left =
        (11.0 * f(t) - 18.0 * f(t - h) + 9.0 * f(t - 2.0 * h) - 2.0 * f(t - 3.0 * h)) / (6.0 * h);
    let right =
        (-11.0 * f(t) + 18.0 * f(t + h) - 9.0 * f(t + 2.0 * h) + 2.0 * f(t + 3.0 * h)) / (6.0 * h);
    (left, right)
}

pub fn spline_report(method: SplineMethod, draws: usize, seed: u64) -> SplineReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SplineReport {
        draws,
        ..Default::default()
    };
    for draw in 0..draws {
        let p = random_spline_params(&mut rng, draw, method);
        let s = build_spline(&p).unwrap();
        let (x, y) = (s.knots_x(), s.knots_y());
        for (xi, yi) in x.iter().zip(y) {
            r.knot_error = r.knot_error.max((s.eval(*xi) - yi).abs());
        }
        let steps = ((p.levels - 1) as f64 / 1e-3).round() as usize;
        let mut prev = s.eval(1.0);
        for i in 1..=steps {
            let v = s.eval(1.0 + i as f64 * 1e-3);
            r.monotone_drop = r.monotone_drop.max(prev - v);
            prev = v;
        }
        for j in 1..x.len() - 1 {
            let gap = (x[j] - x[j - 1]).min(x[j + 1] - x[j]);
            let (left, right) = one_sided(&s, x[j], 1e-6f64.min(gap / 4.0));
            let scale = left.abs().max(right.abs()).max(1.0);
            r.c1_mismatch = r.c1_mismatch.max((left - right).abs() / scale);
        }

        let line = SplineScoreParams::new(p.levels, p.t.clone(), p.t.clone(), method).unwrap();
        let id = build_spline(&line).unwrap();
        for i in 0..=steps {
            let u = 1.0 + i as f64 * 1e-3;
            r.identity_error = r
                .identity_error
                .max((id.eval(u) - u.min(p.levels as f64)).abs());
        }
    }
    r
}

#[derive(Debug, Default, Clone)]
pub struct QuantileReport {
    pub draws: usize,
    /// Draws on which the quantile failed to increase strictly along the p-grid.
    pub non_increasing: usize,
    /// `(K, max |x_k - k|)` for g = h = 0.
    pub integer_mismatch: Vec<(usize, f64)>,
    pub reflection_error: f64,
    pub continuity_error: f64,
}

pub fn quantile_report(draws: usize, seed: u64) -> QuantileReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = QuantileReport {
        draws,
        ..Default::default()
    };
    for _ in 0..draws {
        let params =
            GHParams::new(rng.random_range(-2.0..=2.0), rng.random_range(0.0..=1.0)).unwrap();
        let mut ps: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        ps.extend((0..50).map(|_| rng.random_range(1e-6..1.0 - 1e-6)));
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let q: Vec<f64> = ps
            .iter()
            .map(|&p| gh_quantile(p, params).unwrap())
            .collect();
        if q.windows(2).any(|w| w[1] <= w[0]) {
            r.non_increasing += 1;
        }
        for p in (1..1000).map(|i| i as f64 / 1000.0) {
            let mirrored = GHParams::new(-params.g, params.h).unwrap();
            let err =
                (gh_quantile(1.0 - p, params).unwrap() + gh_quantile(p, mirrored).unwrap()).abs();
            r.reflection_error = r.reflection_error.max(err);
        }
        // The first-order gap g z^2/2 exp(h z^2/2) itself exceeds 1e-6 at
        // |z| = 3 once h > 0.69, so continuity is checked for h <= 0.5.
        let h = params.h / 2.0;
        for i in 0..=600 {
            let z = -3.0 + i as f64 * 0.01;
            let at_zero = gh_transform(z, GHParams::new(0.0, h).unwrap());
            for g in [1e-8, -1e-8] {
                let near = gh_transform(z, GHParams::new(g, h).unwrap());
                r.continuity_error = r.continuity_error.max((near - at_zero).abs());
            }
        }
    }
    for k in 3..=10 {
        let x = gh_scores(k, GHParams::new(0.0, 0.0).unwrap()).unwrap();
        let err = x
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (i + 1) as f64).abs())
            .fold(0.0, f64::max);
        r.integer_mismatch.push((k, err));
    }
    r
}

/// Worst cases of the model-core properties over random instances. All
/// errors are relative unless noted.
#[derive(Debug, Default, Clone, Copy)]
pub struct ModelReport {
    pub instances: usize,
    /// `|X'(y - X b)|_inf / |X'y|_inf`.
    pub orthogonality: f64,
    /// `|X'(y - mu)|_inf / |X'y|_inf` for logistic and Poisson fits.
    pub score_equations: f64,
    pub glm_failures: usize,
    /// Largest absolute coefficient difference of the Gaussian IRLS and OLS fits.
    pub gaussian_glm_vs_ols: f64,
    /// RSS of the full-degree contrast fit against the level-means RSS.
    pub contrasts_vs_one_hot: f64,
    /// Fitted values and criterion after replacing the score column by `a + b x`.
    pub affine_fitted: f64,
    pub affine_criterion: f64,
    /// Score coefficient times `b` against the original coefficient.
    pub affine_coefficient: f64,
    /// Largest relative increase of the criterion after adding a column.
    pub nesting_increase: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn xt(design: &Design, v: &[f64]) -> Vec<f64> {
    let x = design.matrix();
    (0..x.ncols())
        .map(|j| (0..x.nrows()).map(|i| x[(i, j)] * v[i]).sum())
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn model_report(instances: usize, seed: u64) -> ModelReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut r = ModelReport {
        instances,
        ..Default::default()
    };
    for _ in 0..instances {
        let n = rng.random_range(40..=200usize);
        let k = rng.random_range(3..=8usize);
        let codes: Vec<usize> = (0..n)
            .map(|i| if i < k { i } else { rng.random_range(0..k) })
            .collect();
        let factor = OrderedFactor::new(
            "f",
            (1..=k).map(|i| format!("l{i}")).collect(),
            codes.clone(),
        )
        .unwrap();
        let covs: Vec<(String, Vec<f64>)> = (0..rng.random_range(1..=3usize))
            .map(|j| {
                (
                    format!("x{j}"),
                    (0..n).map(|_| std.sample(&mut rng)).collect(),
                )
            })
            .collect();
        let mut scores: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
        scores.sort_by(f64::total_cmp);
        let beta: Vec<f64> = (0..covs.len() + 2)
            .map(|_| std.sample(&mut rng) * 0.5)
            .collect();
        let eta: Vec<f64> = (0..n)
            .map(|i| {
                beta[0]
                    + covs
                        .iter()
                        .zip(&beta[1..])
                        .map(|((_, c), b)| b * c[i])
                        .sum::<f64>()
                    + beta[covs.len() + 1] * 0.2 * (scores[codes[i]] - 5.0)
            })
            .collect();
        let y: Vec<f64> = eta.iter().map(|e| e + std.sample(&mut rng)).collect();

        let scored = |s: &[f64]| {
            let mut cols = vec![("(Intercept)".to_string(), vec![1.0; n])];
            cols.extend(covs.iter().cloned());
            cols.push(("f.score".into(), codes.iter().map(|&c| s[c]).collect()));
            Design::from_columns(cols).unwrap()
        };

        let design = scored(&scores);
        let ols = fit_ols(&design, &y).unwrap();
        let resid: Vec<f64> = y.iter().zip(&ols.fitted).map(|(a, b)| a - b).collect();
        r.orthogonality = r
            .orthogonality
            .max(inf_norm(&xt(&design, &resid)) / inf_norm(&xt(&design, &y)));

        let glm = fit_glm(&design, &y, Family::Gaussian).unwrap();
        for (a, b) in glm.coefficients.iter().zip(&ols.coefficients) {
            r.gaussian_glm_vs_ols = r.gaussian_glm_vs_ols.max((a - b).abs());
        }

        let binary: Vec<f64> = eta
            .iter()
            .map(|e| (rng.random::<f64>() < 1.0 / (1.0 + (-e).exp())) as u8 as f64)
            .collect();
        let counts: Vec<f64> = eta
            .iter()
            .map(|e| {
                let lambda = (0.3 * e).exp();
                // Inversion sampling keeps the draw independent of rand_distr's Poisson.
                let (mut x, mut p, u) = (0.0, (-lambda).exp(), rng.random::<f64>());
                let mut cdf = p;
                while u > cdf {
                    x += 1.0;
                    p *= lambda / x;
                    cdf += p;
                }
                x
            })
            .collect();
        for (family, response) in [(Family::Binomial, &binary), (Family::Poisson, &counts)] {
            match fit_glm(&design, response, family) {
                Ok(fit) => {
                    let resid: Vec<f64> = response
                        .iter()
                        .zip(&fit.fitted)
                        .map(|(a, b)| a - b)
                        .collect();
                    r.score_equations = r
                        .score_equations
                        .max(inf_norm(&xt(&design, &resid)) / inf_norm(&xt(&design, response)));
                }
                Err(_) => r.glm_failures += 1,
            }
        }

        // Full-degree contrasts against the level means, computed directly.
        let term = FactorTerm::new(
            factor.clone(),
            ScoreMapping::PolyContrasts { degree: k - 1 },
        )
        .unwrap();
        let spec = ModelSpec::new("y", y.clone(), vec![], vec![term], Family::Gaussian).unwrap();
        let contrast_fit = fit_ols(&spec.design(&[None]).unwrap(), &y).unwrap();
        let mut sums = vec![(0.0, 0.0); k];
        for (&c, &v) in codes.iter().zip(&y) {
            sums[c].0 += v;
            sums[c].1 += 1.0;
        }
        let one_hot_rss: f64 = codes
            .iter()
            .zip(&y)
            .map(|(&c, &v)| (v - sums[c].0 / sums[c].1).powi(2))
            .sum();
        r.contrasts_vs_one_hot = r
            .contrasts_vs_one_hot
            .max(rel(contrast_fit.criterion, one_hot_rss));

        let a = rng.random_range(-5.0..5.0);
        let b = if rng.random::<bool>() { 1.0 } else { -1.0 } * rng.random_range(0.1..10.0);
        let moved: Vec<f64> = scores.iter().map(|s| a + b * s).collect();
        let other = fit_ols(&scored(&moved), &y).unwrap();
        let scale = inf_norm(&ols.fitted).max(1.0);
        for (u, v) in other.fitted.iter().zip(&ols.fitted) {
            r.affine_fitted = r.affine_fitted.max((u - v).abs() / scale);
        }
        r.affine_criterion = r.affine_criterion.max(rel(other.criterion, ols.criterion));
        let last = ols.coefficients.len() - 1;
        r.affine_coefficient = r
            .affine_coefficient
            .max(rel(other.coefficients[last] * b, ols.coefficients[last]));

        let mut wider = vec![("(Intercept)".to_string(), vec![1.0; n])];
        wider.extend(covs.iter().cloned());
        wider.push(("f.score".into(), codes.iter().map(|&c| scores[c]).collect()));
        wider.push((
            "extra".into(),
            (0..n).map(|_| std.sample(&mut rng)).collect(),
        ));
        let bigger = fit_ols(&Design::from_columns(wider).unwrap(), &y).unwrap();
        r.nesting_increase = r
            .nesting_increase
            .max((bigger.criterion - ols.criterion) / ols.criterion);
    }
    r
}

/// Brute-force minimum of the closed-form RSS over a grid of free working
/// coordinates (the last cell logit of each axis fixed at 0).
pub fn grid_minimum(model: &ModelSpec, axis: &[f64], knots: usize) -> (f64, Vec<f64>) {
    let term = &model.factors[0];
    let k = term.factor().n_levels();
    let stats = LevelStats::new(term.factor().codes(), &model.response, k);
    let dims = 2 * knots;
    let mut best = (f64::INFINITY, vec![]);
    let mut idx = vec![0usize; dims];
    loop {
        let free: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let mut u = free[..knots].to_vec();
        u.push(0.0);
        let mut v = free[knots..].to_vec();
        v.push(0.0);
        let theta = to_theta(&WorkingBlock::Spline { u, v }, term).unwrap();
        if let Ok(Some(scores)) = scores_for(term, Some(&theta)) {
            let rss = stats.rss(scores.values());
            if rss < best.0 {
                best = (rss, free);
            }
        }
        let mut d = 0;
        loop {
            if d == dims {
                return best;
            }
            idx[d] += 1;
            if idx[d] < axis.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
