//! Quantile-based score maps using Tukey's g-and-h family.
//!
//! Level `k` of a `K`-level factor is read as the probability `k/(K+1)` and
//! mapped through the g-and-h quantile function with location 0 and scale 1.
//! The raw quantiles are then rescaled so the first score is 1 and the last
//! is `K`, the same convention as the spline map.

// The rational approximation coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use serde::{Deserialize, Serialize};

use crate::encoding::{standardize_to_unit_range, ScoreVector, SCORE_TIE_TOLERANCE};
use crate::{Error, Result};

/// Below this `|g|` the skewness factor `(exp(gz) - 1)/g` is replaced by its
/// limit `z`.
pub const G_ZERO_THRESHOLD: f64 = 1e-10;

/// Shape parameters of the g-and-h distribution: skewness `g`, tail weight `h >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GHParams {
    pub g: f64,
    pub h: f64,
}

impl GHParams {
    pub fn new(g: f64, h: f64) -> Result<Self> {
        if !g.is_finite() || !h.is_finite() {
            return Err(Error::InvalidShape(format!(
                "g = {g}, h = {h} must be finite"
            )));
        }
        if h < 0.0 {
            return Err(Error::InvalidShape(format!("h = {h} must be nonnegative")));
        }
        Ok(Self { g, h })
    }
}

// Wichura (1988), algorithm AS 241, PPND16.
const SPLIT1: f64 = 0.425;
const SPLIT2: f64 = 5.0;
const CONST1: f64 = 0.180625;
const CONST2: f64 = 1.6;

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_854_561,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Standard normal quantile `Phi^{-1}(p)` for `p` in `(0, 1)`, accurate to
/// about 1e-16 relative.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return Ok(q * horner(&A, r) / horner(&B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let z = if r <= SPLIT2 {
        let r = r - CONST2;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - SPLIT2;
        horner(&E, r) / horner(&F, r)
    };
    Ok(if q < 0.0 { -z } else { z })
}

/// The g-and-h transform of a standard normal deviate `z`.
pub fn gh_transform(z: f64, params: GHParams) -> f64 {
    let tail = (0.5 * params.h * z * z).exp();
    let skew = if params.g.abs() < G_ZERO_THRESHOLD {
        z
    } else {
        (params.g * z).exp_m1() / params.g
    };
    skew * tail
}

/// Quantile of the g-and-h distribution (location 0, scale 1) at `p`.
pub fn gh_quantile(p: f64, params: GHParams) -> Result<f64> {
    Ok(gh_transform(normal_quantile(p)?, params))
}

/// Scores for a `K`-level factor from the g-and-h quantiles at `k/(K+1)`,
/// standardised to `x_1 = 1`, `x_K = K`.
pub fn gh_scores(levels: usize, params: GHParams) -> Result<ScoreVector> {
    if levels < 3 {
        return Err(Error::DegenerateScores(format!(
            "quantile scores need K >= 3, got {levels}"
        )));
    }
    let denom = (levels + 1) as f64;
    let raw = (1..=levels)
        .map(|k| gh_quantile(k as f64 / denom, params))
        .collect::<Result<Vec<_>>>()?;
    let spread = raw[levels - 1] - raw[0];
    if !spread.is_finite() || spread < SCORE_TIE_TOLERANCE {
        return Err(Error::DegenerateScores(format!(
            "g-and-h quantiles span {spread} for g = {}, h = {}",
            params.g, params.h
        )));
    }
    ScoreVector::new(standardize_to_unit_range(&raw))
}
