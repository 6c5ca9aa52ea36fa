//! Second-order block differences and their cumulative, weight-normalized
//! running sums.
//!
//! The secant slope of `C` against `A` over any long range of indices
//! estimates the average response difference (first group minus second
//! group) over the corresponding range of scores. That expectation is not
//! observable and is only checked statistically.

use serde::Serialize;

use crate::blocking::{BlockSequence, Subpopulation};
use crate::error::{Error, Result};
use crate::sum::{self, prefix_sums};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceSequence {
    /// `D_0 .. D_{n-1}`, always subpopulation 0 minus subpopulation 1.
    pub d: Vec<f64>,
    /// Aggregated weights `W_0 .. W_{n-1}`.
    pub w: Vec<f64>,
    /// Block-average score of block `j` for `j = 0..=n`; block `j` is the
    /// doubly weighted middle of the window behind `D_{j-1}`. Empty when the
    /// sequence was built by hand.
    pub anchor_scores: Vec<f64>,
}

impl DifferenceSequence {
    pub fn new(d: Vec<f64>, w: Vec<f64>) -> Self {
        assert_eq!(d.len(), w.len(), "one weight per difference");
        Self {
            d,
            w,
            anchor_scores: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// True when every aggregated weight is bitwise equal.
    pub fn has_uniform_weights(&self) -> bool {
        self.w.iter().all(|&w| w == self.w[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeSeries {
    /// `C_0 .. C_n`, oriented as the caller's first group minus second.
    pub c: Vec<f64>,
    /// `A_0 .. A_n`.
    pub a: Vec<f64>,
    pub sign_flipped: bool,
    /// Score anchoring each index, for axis labels. May be empty.
    pub score_at_k: Vec<f64>,
    /// Whether the abscissae are exactly `k/n`.
    pub uniform: bool,
}

impl CumulativeSeries {
    pub fn n(&self) -> usize {
        self.c.len() - 1
    }
}

pub fn difference_sequence(blocks: &BlockSequence) -> Result<DifferenceSequence> {
    if blocks.len() < 3 {
        return Err(Error::TooFewBlocks(blocks.len()));
    }
    let r = blocks.responses();
    let d = blocks
        .blocks
        .windows(3)
        .zip(r.windows(3))
        .map(|(win, r)| {
            let centered = (r[0] + r[2] - 2.0 * r[1]) / 2.0;
            match win[0].owner {
                Subpopulation::Zero => centered,
                Subpopulation::One => -centered,
            }
        })
        .collect();
    let n = blocks.len() - 2;
    Ok(DifferenceSequence {
        d,
        w: aggregate_weights(blocks)?,
        anchor_scores: blocks.blocks[..=n].iter().map(|b| b.avg_score).collect(),
    })
}

pub fn aggregate_weights(blocks: &BlockSequence) -> Result<Vec<f64>> {
    if blocks.len() < 3 {
        return Err(Error::TooFewBlocks(blocks.len()));
    }
    Ok(aggregate_block_weights(&blocks.weights()))
}

/// `W_k = T_k + 2 T_{k+1} + T_{k+2}` over consecutive block weights `T`.
pub fn aggregate_block_weights(t: &[f64]) -> Vec<f64> {
    t.windows(3).map(|t| t[0] + 2.0 * t[1] + t[2]).collect()
}

/// Accumulates `C` and `A`. Equal aggregated weights take the unweighted
/// route, so `A_j = j/n` exactly.
pub fn cumulative_series(diffs: &DifferenceSequence, sign_flipped: bool) -> CumulativeSeries {
    let n = diffs.n();
    assert!(n >= 1, "cumulative series needs at least one difference");
    let uniform = diffs.has_uniform_weights();
    let (mut c, a): (Vec<f64>, Vec<f64>) = if uniform {
        let nf = n as f64;
        let c = prefix_sums(&diffs.d).into_iter().map(|s| s / nf).collect();
        let a = (0..=n).map(|j| j as f64 / nf).collect();
        (c, a)
    } else {
        let total = sum::sum(diffs.w.iter().copied());
        let wd: Vec<f64> = diffs.w.iter().zip(&diffs.d).map(|(w, d)| w * d).collect();
        let c = prefix_sums(&wd).into_iter().map(|s| s / total).collect();
        let a = prefix_sums(&diffs.w)
            .into_iter()
            .map(|s| s / total)
            .collect();
        (c, a)
    };
    if sign_flipped {
        for v in &mut c {
            *v = -*v;
        }
    }
    CumulativeSeries {
        c,
        a,
        sign_flipped,
        score_at_k: diffs.anchor_scores.clone(),
        uniform,
    }
}
