//! Scalar statistics of a cumulative series and their significance scale.
//!
//! `sigma` is the scale of full-range fluctuation expected when both
//! subpopulations share one response function. It is a conservative bound
//! derived for 0/1 responses and relies on two modeling assumptions about
//! bias from block averaging and from differencing at slightly different
//! scores; neither is checkable from data. Results for non-binary
//! responses carry `bernoulli_valid = false`.

use serde::{Deserialize, Serialize};

use crate::cumulative::CumulativeSeries;
use crate::sum;

/// Kolmogorov-Smirnov statistic: `max |C_k|` for `k = 1..=n`.
pub fn ks_statistic(series: &CumulativeSeries) -> f64 {
    series.c[1..].iter().fold(0.0, |m, &c| f64::max(m, c.abs()))
}

/// Kuiper statistic: range of `C_0..=C_n`, with `C_0 = 0` included.
pub fn kuiper_statistic(series: &CumulativeSeries) -> f64 {
    let (lo, hi) = series
        .c
        .iter()
        .fold((0.0f64, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    hi - lo
}

/// `1/sqrt(n)` without weights; `sqrt(sum W^2) / sum W` with weights.
/// Equal weights always return `1/sqrt(n)`.
pub fn sigma(n: usize, weights: Option<&[f64]>) -> f64 {
    assert!(n >= 1, "sigma needs n >= 1");
    match weights {
        Some(w) if !w.iter().all(|&x| x == w[0]) => {
            debug_assert_eq!(w.len(), n);
            let scale = w.iter().fold(0.0f64, |m, &x| m.max(x));
            let squares = sum::sum(w.iter().map(|&x| (x / scale) * (x / scale)));
            let total = sum::sum(w.iter().map(|&x| x / scale));
            squares.sqrt() / total
        }
        _ => 1.0 / (n as f64).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceTriangle {
    /// Extent above and below the origin; tip-to-tip height is twice this.
    pub half_height: f64,
}

/// The origin-anchored triangle spans `4 sigma` tip to tip.
pub fn triangle(sigma: f64) -> SignificanceTriangle {
    assert!(sigma > 0.0, "sigma must be positive");
    SignificanceTriangle {
        half_height: 2.0 * sigma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub sigma: f64,
    #[serde(rename = "G/sigma")]
    pub g_over_sigma: f64,
    #[serde(rename = "H/sigma")]
    pub h_over_sigma: f64,
    pub bernoulli_valid: bool,
}

impl SummaryStats {
    pub fn new(series: &CumulativeSeries, weights: &[f64], bernoulli_valid: bool) -> Self {
        let n = series.n();
        let g = ks_statistic(series);
        let h = kuiper_statistic(series);
        let sigma = sigma(n, Some(weights));
        Self {
            n,
            g,
            h,
            sigma,
            g_over_sigma: g / sigma,
            h_over_sigma: h / sigma,
            bernoulli_valid,
        }
    }
}
