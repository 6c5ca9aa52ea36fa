//! The full comparison for one pair of subpopulations.

use serde::Serialize;

use crate::blocking::{block_sequence, BlockSequence};
use crate::cumulative::{
    cumulative_series, difference_sequence, CumulativeSeries, DifferenceSequence,
};
use crate::error::Result;
use crate::ingest::{all_bernoulli, Observation};
use crate::summary::{triangle, SignificanceTriangle, SummaryStats};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub blocks: BlockSequence,
    pub diffs: DifferenceSequence,
    pub series: CumulativeSeries,
    pub stats: SummaryStats,
    pub triangle: SignificanceTriangle,
}

/// Runs blocking, differencing, accumulation, and summary statistics.
/// The series reads `first` minus `second`. Scores must already be distinct.
pub fn compare(first: &[Observation], second: &[Observation]) -> Result<Comparison> {
    let blocks = block_sequence(first, second)?;
    let diffs = difference_sequence(&blocks)?;
    let series = cumulative_series(&diffs, blocks.sign_flipped);
    let bernoulli = all_bernoulli(first.iter().chain(second));
    let stats = SummaryStats::new(&series, &diffs.w, bernoulli);
    Ok(Comparison {
        triangle: triangle(stats.sigma),
        blocks,
        diffs,
        series,
        stats,
    })
}
