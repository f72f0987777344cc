//! Fits for a fixed design matrix: ordinary least squares and GLMs by IRLS.
//!
//! The fit criterion `Q` is the residual sum of squares for the Gaussian
//! family and the residual deviance otherwise; lower is better.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::linalg::PivotedQr;
use crate::{Error, Result};

pub const IRLS_TOLERANCE: f64 = 1e-10;
pub const IRLS_MAX_ITERATIONS: usize = 50;
const MAX_STEP_HALVINGS: usize = 30;
/// Linear predictors beyond this magnitude put a logistic fitted probability
/// within about 1e-11 of 0 or 1, which signals separation.
const SEPARATION_ETA: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    #[serde(alias = "gaussian-identity")]
    Gaussian,
    #[serde(alias = "binomial-logit")]
    Binomial,
    #[serde(alias = "poisson-log")]
    Poisson,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
        })
    }
}

impl Family {
    fn link(self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => mu,
            Family::Binomial => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
        }
    }

    fn inverse_link(self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => eta,
            Family::Binomial => 1.0 / (1.0 + (-eta).exp()),
            Family::Poisson => eta.exp(),
        }
    }

    /// `d mu / d eta`.
    fn mu_eta(self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0,
            Family::Binomial => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family::Poisson => eta.exp(),
        }
    }

    fn variance(self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0,
            Family::Binomial => mu * (1.0 - mu),
            Family::Poisson => mu,
        }
    }

    fn unit_deviance(self, y: f64, mu: f64) -> f64 {
        // y log(y / mu) with the 0 log 0 = 0 convention.
        let ylog = |y: f64, mu: f64| if y == 0.0 { 0.0 } else { y * (y / mu).ln() };
        match self {
            Family::Gaussian => (y - mu) * (y - mu),
            Family::Binomial => 2.0 * (ylog(y, mu) + ylog(1.0 - y, 1.0 - mu)),
            Family::Poisson => 2.0 * (ylog(y, mu) - (y - mu)),
        }
    }

    fn deviance(self, y: &[f64], mu: &[f64]) -> f64 {
        y.iter()
            .zip(mu)
            .map(|(&a, &b)| self.unit_deviance(a, b))
            .sum()
    }

    fn initial_mu(self, y: f64) -> f64 {
        match self {
            Family::Gaussian => y,
            Family::Binomial => (y + 0.5) / 2.0,
            Family::Poisson => y + 0.1,
        }
    }

    /// Whether the dispersion is estimated from the residuals.
    pub fn estimates_dispersion(self) -> bool {
        matches!(self, Family::Gaussian)
    }

    fn validate_response(self, y: &[f64]) -> Result<()> {
        let bad = |reason: String| Error::InvalidResponse {
            family: self.to_string(),
            reason,
        };
        for (i, &v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(bad(format!("observation {i} is {v}")));
            }
            match self {
                Family::Gaussian => {}
                Family::Binomial if v != 0.0 && v != 1.0 => {
                    return Err(bad(format!("observation {i} is {v}, expected 0 or 1")));
                }
                Family::Poisson if v < 0.0 || v.fract() != 0.0 => {
                    return Err(bad(format!(
                        "observation {i} is {v}, expected a nonnegative integer"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// A design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    names: Vec<String>,
    matrix: DMatrix<f64>,
}

impl Design {
    pub fn new(names: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        if names.len() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                matrix.ncols()
            )));
        }
        Ok(Self { names, matrix })
    }

    /// Assembles a design from named columns of equal length.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.1.len());
        if let Some((name, col)) = columns.iter().find(|c| c.1.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "column `{name}` has {} rows, expected {n}",
                col.len()
            )));
        }
        let p = columns.len();
        let mut matrix = DMatrix::zeros(n, p);
        let mut names = Vec::with_capacity(p);
        for (j, (name, col)) in columns.into_iter().enumerate() {
            matrix.set_column(j, &DVector::from_vec(col));
            names.push(name);
        }
        Ok(Self { names, matrix })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        let (n, p) = self.matrix.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "response has {} values, design has {n} rows",
                y.len()
            )));
        }
        if n <= p {
            return Err(Error::InsufficientData { n, p });
        }
        Ok(())
    }

    fn factorize(&self, weights: Option<&[f64]>) -> Result<PivotedQr> {
        let qr = match weights {
            None => PivotedQr::new(&self.matrix),
            Some(w) => {
                let mut m = self.matrix.clone();
                for (i, wi) in w.iter().enumerate() {
                    m.row_mut(i).scale_mut(wi.sqrt());
                }
                PivotedQr::new(&m)
            }
        };
        match qr.first_dependent_column() {
            None => Ok(qr),
            Some(c) => Err(Error::SingularDesign {
                rank: qr.rank(),
                columns: qr.ncols(),
                column: self.names[c].clone(),
            }),
        }
    }
}

/// Coefficient table and fit summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `t` (Gaussian) or `z` (otherwise) statistics.
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Residual sum of squares (Gaussian) or residual deviance.
    pub criterion: f64,
    pub df_residual: usize,
    /// `sqrt(criterion / df_residual)`, Gaussian family only.
    pub residual_sd: Option<f64>,
    pub iterations: usize,
    pub fitted: Vec<f64>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn t_value(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.t_values[i])
    }
}

/// The criterion `Q` of a fit: RSS or residual deviance.
pub fn criterion(fit: &FitResult) -> f64 {
    fit.criterion
}

fn summarize(
    family: Family,
    design: &Design,
    beta: &DVector<f64>,
    qr: &PivotedQr,
    criterion: f64,
    fitted: Vec<f64>,
    iterations: usize,
) -> FitResult {
    let n = design.nrows();
    let p = design.ncols();
    let df = n - p;
    let dispersion = if family.estimates_dispersion() {
        criterion / df as f64
    } else {
        1.0
    };
    let cov = qr.unscaled_covariance();
    let std_errors: Vec<f64> = (0..p).map(|i| (dispersion * cov[(i, i)]).sqrt()).collect();
    let t_values: Vec<f64> = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| if *se > 0.0 { b / se } else { f64::NAN })
        .collect();
    let p_values = match family {
        Family::Gaussian => {
            let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
            t_values
                .iter()
                .map(|t| two_sided(t, |v| dist.sf(v)))
                .collect()
        }
        _ => {
            let dist = Normal::standard();
            t_values
                .iter()
                .map(|t| two_sided(t, |v| dist.sf(v)))
                .collect()
        }
    };
    FitResult {
        family,
        names: design.names().to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        t_values,
        p_values,
        criterion,
        df_residual: df,
        residual_sd: family
            .estimates_dispersion()
            .then(|| (criterion / df as f64).sqrt()),
        iterations,
        fitted,
    }
}

fn two_sided(stat: &f64, sf: impl Fn(f64) -> f64) -> f64 {
    if stat.is_nan() {
        f64::NAN
    } else {
        2.0 * sf(stat.abs())
    }
}

/// Least squares via pivoted QR; standard errors from `sigma^2 (X^T X)^{-1}`.
pub fn fit_ols(design: &Design, y: &[f64]) -> Result<FitResult> {
    design.check(y)?;
    Family::Gaussian.validate_response(y)?;
    let qr = design.factorize(None)?;
    let yv = DVector::from_column_slice(y);
    let beta = qr.solve(&yv);
    let fitted = design.matrix() * &beta;
    let rss = fitted
        .iter()
        .zip(y)
        .map(|(f, yi)| (yi - f) * (yi - f))
        .sum();
    Ok(summarize(
        Family::Gaussian,
        design,
        &beta,
        &qr,
        rss,
        fitted.iter().copied().collect(),
        1,
    ))
}

/// Maximum likelihood by iteratively reweighted least squares.
///
/// Converges when the relative change in deviance,
/// `|D - D_old| / (|D| + 0.1)`, drops below [`IRLS_TOLERANCE`]. Steps that
/// increase the deviance are halved. Standard errors come from the inverse
/// Fisher information at the final estimate.
pub fn fit_glm(design: &Design, y: &[f64], family: Family) -> Result<FitResult> {
    design.check(y)?;
    family.validate_response(y)?;
    let x = design.matrix();
    let n = design.nrows();

    let mut mu: Vec<f64> = y.iter().map(|&v| family.initial_mu(v)).collect();
    let mut eta: Vec<f64> = mu.iter().map(|&m| family.link(m)).collect();
    let mut dev_old = family.deviance(y, &mu);
    let mut beta_old: Option<DVector<f64>> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut beta = DVector::zeros(design.ncols());

    while iterations < IRLS_MAX_ITERATIONS {
        if family == Family::Binomial {
            check_separation(&eta, iterations)?;
        }
        iterations += 1;
        let mut z = DVector::zeros(n);
        let mut w = vec![0.0; n];
        for i in 0..n {
            let g = family.mu_eta(eta[i]);
            z[i] = eta[i] + (y[i] - mu[i]) / g;
            w[i] = g * g / family.variance(mu[i]);
        }
        let qr = design.factorize(Some(&w))?;
        for (i, wi) in w.iter().enumerate() {
            z[i] *= wi.sqrt();
        }
        let mut candidate = qr.solve(&z);

        let mut dev;
        let mut halvings = 0;
        loop {
            let eta_new = x * &candidate;
            let mu_new: Vec<f64> = eta_new.iter().map(|&e| family.inverse_link(e)).collect();
            dev = family.deviance(y, &mu_new);
            let worse = beta_old.is_some() && dev - dev_old > 1e-12 * (dev_old.abs() + 0.1);
            if dev.is_finite() && !worse {
                eta = eta_new.iter().copied().collect();
                mu = mu_new;
                break;
            }
            let Some(prev) = beta_old.as_ref() else {
                return Err(Error::IrlsDidNotConverge {
                    iterations,
                    diagnostics: format!("non-finite deviance {dev} at the first step"),
                });
            };
            halvings += 1;
            if halvings > MAX_STEP_HALVINGS {
                return Err(Error::IrlsDidNotConverge {
                    iterations,
                    diagnostics: format!("step halving failed to reduce deviance below {dev_old}"),
                });
            }
            candidate = (&candidate + prev) * 0.5;
        }
        beta = candidate;
        beta_old = Some(beta.clone());

        let change = (dev - dev_old).abs() / (dev.abs() + 0.1);
        dev_old = dev;
        if change < IRLS_TOLERANCE {
            converged = true;
            break;
        }
    }

    let max_eta = eta.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if !converged {
        return Err(Error::IrlsDidNotConverge {
            iterations,
            diagnostics: format!("deviance {dev_old}, max |eta| {max_eta:.3e}"),
        });
    }
    if family == Family::Binomial {
        check_separation(&eta, iterations)?;
    }

    let w: Vec<f64> = (0..n)
        .map(|i| {
            let g = family.mu_eta(eta[i]);
            g * g / family.variance(mu[i])
        })
        .collect();
    let qr = design.factorize(Some(&w))?;
    Ok(summarize(
        family, design, &beta, &qr, dev_old, mu, iterations,
    ))
}

fn check_separation(eta: &[f64], iterations: usize) -> Result<()> {
    let max_eta = eta.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if max_eta > SEPARATION_ETA {
        return Err(Error::IrlsDidNotConverge {
            iterations,
            diagnostics: format!(
                "fitted probabilities numerically 0 or 1 (max |eta| {max_eta:.3e}); \
                 the data look separated"
            ),
        });
    }
    Ok(())
}

/// Dispatches to [`fit_ols`] for the Gaussian family and [`fit_glm`] otherwise.
pub fn fit(design: &Design, y: &[f64], family: Family) -> Result<FitResult> {
    match family {
        Family::Gaussian => fit_ols(design, y),
        _ => fit_glm(design, y, family),
    }
}
