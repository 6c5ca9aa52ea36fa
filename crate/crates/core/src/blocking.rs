//! Interleaving two subpopulations into alternating single-owner blocks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Observation;
use crate::sum::NeumaierSum;

/// Which of the caller's two groups an observation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    First,
    Second,
}

/// Internal relabeling: `Zero` owns the least merged score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Subpopulation {
    Zero,
    One,
}

impl Subpopulation {
    pub fn other(self) -> Self {
        match self {
            Subpopulation::Zero => Subpopulation::One,
            Subpopulation::One => Subpopulation::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Subpopulation::Zero => 0,
            Subpopulation::One => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tagged {
    pub score: f64,
    pub response: f64,
    pub weight: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub owner: Subpopulation,
    pub avg_score: f64,
    pub avg_response: f64,
    /// Plain mean of the member weights.
    pub avg_weight: f64,
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSequence {
    pub blocks: Vec<Block>,
    /// Set when the caller's first group became subpopulation 1.
    pub sign_flipped: bool,
}

impl BlockSequence {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn responses(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.avg_response).collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.avg_score).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.avg_weight).collect()
    }
}

/// Merges both groups into one sequence sorted strictly by score.
pub fn merge_and_sort(first: &[Observation], second: &[Observation]) -> Result<Vec<Tagged>> {
    if first.is_empty() {
        return Err(Error::EmptySubpopulation("first".into()));
    }
    if second.is_empty() {
        return Err(Error::EmptySubpopulation("second".into()));
    }
    let tag = |origin: Origin| {
        move |o: &Observation| Tagged {
            score: o.score,
            response: o.response,
            weight: o.weight,
            origin,
        }
    };
    let mut merged: Vec<Tagged> = first
        .iter()
        .map(tag(Origin::First))
        .chain(second.iter().map(tag(Origin::Second)))
        .collect();
    merged.sort_by(|a, b| a.score.total_cmp(&b.score));
    if let Some(w) = merged.windows(2).find(|w| w[0].score == w[1].score) {
        return Err(Error::DuplicateScore(w[0].score));
    }
    Ok(merged)
}

/// Splits a sorted merged sequence into maximal same-origin runs and
/// averages each run.
///
/// Scores and responses are weighted means normalized within the block. The
/// block weight is the plain mean of its members' weights. Weights are
/// divided by the block's first weight before accumulating, so a block with
/// equal weights yields exactly the unweighted averages.
pub fn partition_blocks(merged: &[Tagged]) -> Result<BlockSequence> {
    if merged.is_empty() {
        return Err(Error::TooFewBlocks(0));
    }
    let first_origin = merged[0].origin;
    let mut blocks = Vec::new();
    let mut owner = Subpopulation::Zero;
    for run in merged.chunk_by(|a, b| a.origin == b.origin) {
        blocks.push(average_block(owner, run));
        owner = owner.other();
    }
    if blocks.len() < 3 {
        return Err(Error::TooFewBlocks(blocks.len()));
    }
    Ok(BlockSequence {
        blocks,
        sign_flipped: first_origin == Origin::Second,
    })
}

fn average_block(owner: Subpopulation, members: &[Tagged]) -> Block {
    let reference = members[0].weight;
    let mut total = NeumaierSum::new();
    let mut score = NeumaierSum::new();
    let mut response = NeumaierSum::new();
    for m in members {
        let rel = m.weight / reference;
        total += rel;
        score += rel * m.score;
        response += rel * m.response;
    }
    let total = total.value();
    let count = members.len();
    Block {
        owner,
        avg_score: score.value() / total,
        avg_response: response.value() / total,
        avg_weight: reference * (total / count as f64),
        member_count: count,
    }
}

/// Merge, sort, and partition in one step.
pub fn block_sequence(first: &[Observation], second: &[Observation]) -> Result<BlockSequence> {
    partition_blocks(&merge_and_sort(first, second)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(points: &[(f64, f64)], group: &str) -> Vec<Observation> {
        points
            .iter()
            .map(|&(s, r)| Observation::new(s, r, group))
            .collect()
    }

    fn tagged(points: &[(f64, f64, f64, Origin)]) -> Vec<Tagged> {
        points
            .iter()
            .map(|&(score, response, weight, origin)| Tagged {
                score,
                response,
                weight,
                origin,
            })
            .collect()
    }

    use Origin::{First as A, Second as B};

    #[test]
    fn merge_interleaves_by_score() {
        let a = obs(&[(0.3, 0.0), (0.1, 0.0)], "A");
        let b = obs(&[(0.4, 0.0), (0.2, 0.0)], "B");
        let merged = merge_and_sort(&a, &b).unwrap();
        let order: Vec<(f64, Origin)> = merged.iter().map(|t| (t.score, t.origin)).collect();
        assert_eq!(order, vec![(0.1, A), (0.2, B), (0.3, A), (0.4, B)]);
    }

    #[test]
    fn merge_rejects_degenerate_inputs() {
        let a = obs(&[(5.0, 0.0)], "A");
        assert!(matches!(
            merge_and_sort(&a, &[]),
            Err(Error::EmptySubpopulation(_))
        ));
        let b = obs(&[(0.1, 1.0)], "B");
        let a = obs(&[(0.1, 0.0)], "A");
        assert!(matches!(
            merge_and_sort(&a, &b),
            Err(Error::DuplicateScore(_))
        ));
    }

    #[test]
    fn four_alternating_blocks() {
        let merged = tagged(&[
            (0.1, 1.0, 1.0, A),
            (0.2, 0.0, 1.0, B),
            (0.3, 1.0, 1.0, A),
            (0.4, 0.0, 1.0, B),
        ]);
        let seq = partition_blocks(&merged).unwrap();
        assert_eq!(seq.scores(), vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(seq.responses(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(seq.weights(), vec![1.0; 4]);
        assert!(!seq.sign_flipped);
        let owners: Vec<usize> = seq.blocks.iter().map(|b| b.owner.index()).collect();
        assert_eq!(owners, vec![0, 1, 0, 1]);
    }

    #[test]
    fn two_blocks_is_too_few() {
        let merged = tagged(&[(0.1, 0.0, 1.0, A), (0.2, 0.0, 1.0, A), (0.3, 0.0, 1.0, B)]);
        assert!(matches!(
            partition_blocks(&merged),
            Err(Error::TooFewBlocks(2))
        ));
    }

    #[test]
    fn run_averaging() {
        let merged = tagged(&[
            (0.1, 1.0, 1.0, A),
            (0.2, 0.0, 1.0, A),
            (0.3, 1.0, 1.0, B),
            (0.4, 1.0, 1.0, A),
        ]);
        let seq = partition_blocks(&merged).unwrap();
        assert_eq!(seq.responses(), vec![0.5, 1.0, 1.0]);
        assert_eq!(seq.blocks[0].member_count, 2);
        assert!((seq.blocks[0].avg_score - 0.15).abs() < 1e-15);
    }

    #[test]
    fn weighted_block_average() {
        let merged = tagged(&[
            (0.1, 1.0, 3.0, B),
            (0.2, 0.0, 1.0, B),
            (0.3, 1.0, 1.0, A),
            (0.4, 1.0, 1.0, B),
        ]);
        let seq = partition_blocks(&merged).unwrap();
        assert_eq!(seq.blocks[0].avg_response, 0.75);
        assert_eq!(seq.blocks[0].avg_weight, 2.0);
        assert!((seq.blocks[0].avg_score - 0.125).abs() < 1e-15);
        assert!(seq.sign_flipped);
    }

    #[test]
    fn equal_weights_give_plain_means_exactly() {
        let pts: Vec<(f64, f64, f64, Origin)> = (0..7)
            .map(|i| {
                (
                    i as f64 * 0.1 + 0.013,
                    (i % 3) as f64 / 3.0,
                    0.37,
                    if i < 3 || i == 5 { A } else { B },
                )
            })
            .collect();
        let weighted = partition_blocks(&tagged(&pts)).unwrap();
        let unit: Vec<_> = pts.iter().map(|&(s, r, _, o)| (s, r, 1.0, o)).collect();
        let plain = partition_blocks(&tagged(&unit)).unwrap();
        assert_eq!(weighted.scores(), plain.scores());
        assert_eq!(weighted.responses(), plain.responses());
        assert!(weighted.weights().iter().all(|&w| w == 0.37));
    }
}
