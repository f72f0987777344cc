//! Nelder–Mead simplex minimisation.

use serde::{Deserialize, Serialize};

/// The standard simplex move coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexOptions {
    /// Offset added to each coordinate of the start point to form the initial simplex.
    pub initial_step: f64,
    /// Stop once `max f - min f` over the simplex falls below this.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            tolerance: 1e-9,
            max_evaluations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// `max f - min f` over the final simplex.
    pub spread: f64,
}

/// Minimises `f` from `x0`. Non-finite objective values are treated as `+inf`.
///
/// The best vertex value never increases, so the result is never worse than
/// `f(x0)`. Ties are broken by vertex index, making runs reproducible.
pub fn minimize<F>(mut f: F, x0: &[f64], options: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    vertices.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += options.initial_step;
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| eval(v, &mut evaluations)).collect();
    if n == 0 {
        return SimplexResult {
            x: vertices.swap_remove(0),
            value: values[0],
            evaluations,
            converged: true,
            spread: 0.0,
        };
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut converged = false;
    let mut spread;
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        spread = values[worst] - values[best];
        if spread.is_finite() && spread < options.tolerance {
            converged = true;
            break;
        }
        if evaluations >= options.max_evaluations {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&vertices[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coef * (x - c))
                .collect()
        };

        let reflected = toward(-REFLECT, &vertices[worst]);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[best] {
            let expanded = toward(-REFLECT * EXPAND, &vertices[worst]);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                vertices[worst] = expanded;
                values[worst] = fe;
            } else {
                vertices[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            vertices[worst] = reflected;
            values[worst] = fr;
            continue;
        }

        // Outside contraction if the reflection beat the worst vertex, inside otherwise.
        let (contracted, fc) = if fr < values[worst] {
            let c = toward(-REFLECT * CONTRACT, &vertices[worst]);
            let fc = eval(&c, &mut evaluations);
            (c, fc)
        } else {
            let c = toward(CONTRACT, &vertices[worst]);
            let fc = eval(&c, &mut evaluations);
            (c, fc)
        };
        if fc < values[worst].min(fr) {
            vertices[worst] = contracted;
            values[worst] = fc;
            continue;
        }

        let anchor = vertices[best].clone();
        for &i in &order[1..] {
            let shrunk: Vec<f64> = anchor
                .iter()
                .zip(&vertices[i])
                .map(|(a, x)| a + SHRINK * (x - a))
                .collect();
            values[i] = eval(&shrunk, &mut evaluations);
            vertices[i] = shrunk;
        }
    }

    let best = order[0];
    SimplexResult {
        x: vertices[best].clone(),
        value: values[best],
        evaluations,
        converged,
        spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &SimplexOptions::default(),
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] + 2.0).abs() < 1e-3,
            "{r:?}"
        );
        assert!(r.value < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let opts = SimplexOptions {
            tolerance: 1e-14,
            max_evaluations: 5000,
            ..Default::default()
        };
        let r = minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert!(
            (r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4,
            "{r:?}"
        );
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let r = minimize(
            |x| {
                if x[0] < 0.5 {
                    f64::NAN
                } else {
                    (x[0] - 2.0).powi(2)
                }
            },
            &[1.0],
            &SimplexOptions::default(),
        );
        assert!((r.x[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn never_worse_than_start_and_respects_budget() {
        let opts = SimplexOptions {
            max_evaluations: 15,
            ..Default::default()
        };
        let f = |x: &[f64]| x.iter().map(|v| (v * 3.0).sin() + v * v).sum::<f64>();
        let x0 = [0.7, -0.4, 1.1];
        let r = minimize(f, &x0, &opts);
        assert!(r.value <= f(&x0));
        assert!(!r.converged);
        assert!(r.evaluations <= 15 + 3 + 1);
    }
}
