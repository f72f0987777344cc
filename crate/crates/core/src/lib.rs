//! Numeric scores for ordered factors in regression models.
//!
//! An ordered factor with levels `F_1 < ... < F_K` enters the linear
//! predictor as a single column built from scores `x_1 < ... < x_K`. The
//! scores come from a parametric map `s(k, theta)`, either a Tukey g-and-h
//! quantile function or a monotone cubic spline, and `theta` is chosen by
//! minimising the model's fit criterion (residual sum of squares or
//! residual deviance) with the regression coefficients profiled out.
//!
//! The crate is organised bottom up:
//!
//! - [`encoding`]: ordered factors and their baseline encodings.
//! - [`spline`]: monotone cubic Hermite interpolation (Fritsch–Carlson, Hyman).
//! - [`quantile`]: g-and-h quantiles and the scores built from them.
//! - [`model`]: least squares and IRLS fits for a fixed design.
//! - [`terms`]: model specification and design-matrix assembly.
//! - [`working`]: unconstrained working parameters for the score maps.
//! - [`optimizer`]: the outer search over score parameters.
//! - [`compare`]: side-by-side fits under each encoding.

pub mod compare;
pub mod encoding;
mod error;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod quantile;
pub mod simplex;
pub mod spline;
pub mod terms;
pub mod working;

pub use error::{Error, Result};
