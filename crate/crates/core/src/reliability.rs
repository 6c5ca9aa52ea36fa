//! Classical binned reliability diagrams for both subpopulations.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Observation;
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinStrategy {
    /// Equal-width bins over the merged score range, shared by both groups.
    Width,
    /// Equal member counts per bin, per group; the last bin takes the remainder.
    Count,
    /// Per group, bins whose `sum(w^2) / sum(w)^2` is similar.
    Ratio,
}

impl BinStrategy {
    pub const ALL: [BinStrategy; 3] = [BinStrategy::Width, BinStrategy::Count, BinStrategy::Ratio];

    pub fn name(self) -> &'static str {
        match self {
            BinStrategy::Width => "width",
            BinStrategy::Count => "count",
            BinStrategy::Ratio => "ratio",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            BinStrategy::Width => "reliability diagram",
            BinStrategy::Count => {
                "reliability diagram (equal number of subpopulation scores per bin)"
            }
            BinStrategy::Ratio => "reliability diagram (||W||_2/||W||_1 is similar for every bin)",
        }
    }
}

impl fmt::Display for BinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BinStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "width" => Ok(BinStrategy::Width),
            "count" => Ok(BinStrategy::Count),
            "ratio" => Ok(BinStrategy::Ratio),
            other => Err(format!(
                "unknown binning strategy `{other}` (expected width, count, or ratio)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinningSpec {
    pub strategy: BinStrategy,
    pub bin_count: usize,
}

impl BinningSpec {
    pub fn new(strategy: BinStrategy, bin_count: usize) -> Self {
        Self {
            strategy,
            bin_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub avg_score: f64,
    pub avg_response: f64,
    pub total_weight: f64,
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityDiagram {
    pub spec: BinningSpec,
    pub first: Vec<Bin>,
    pub second: Vec<Bin>,
}

/// `bins + 1` edges evenly dividing `[lo, hi]`.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| {
            if i == bins {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / bins as f64)
            }
        })
        .collect()
}

/// Assigns the members of `pop` to bins, returning indices into `pop`
/// ordered by score within each bin. `span` is the score range used by
/// equal-width bins; the other strategies ignore it. Equal-width bins may be
/// empty.
pub fn compute_bins(
    pop: &[Observation],
    spec: &BinningSpec,
    span: (f64, f64),
) -> Result<Vec<Vec<usize>>> {
    let size = pop.len();
    if spec.bin_count == 0 || spec.bin_count > size {
        return Err(Error::InvalidBinCount {
            bins: spec.bin_count,
            size,
        });
    }
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| pop[a].score.total_cmp(&pop[b].score).then(a.cmp(&b)));

    let bins = match spec.strategy {
        BinStrategy::Width => width_bins(pop, &order, spec.bin_count, span),
        BinStrategy::Count => count_bins(&order, spec.bin_count),
        BinStrategy::Ratio => ratio_bins(pop, &order, spec.bin_count),
    };
    Ok(bins)
}

fn width_bins(
    pop: &[Observation],
    order: &[usize],
    bins: usize,
    (lo, hi): (f64, f64),
) -> Vec<Vec<usize>> {
    let edges = equal_width_edges(lo, hi, bins);
    let mut out = vec![Vec::new(); bins];
    for &i in order {
        let s = pop[i].score;
        let mut k = if hi > lo {
            (((s - lo) / (hi - lo)) * bins as f64)
                .floor()
                .clamp(0.0, (bins - 1) as f64) as usize
        } else {
            0
        };
        // reconcile with the materialized edges; the top edge is inclusive
        while k + 1 < bins && s >= edges[k + 1] {
            k += 1;
        }
        while k > 0 && s < edges[k] {
            k -= 1;
        }
        out[k].push(i);
    }
    out
}

fn count_bins(order: &[usize], bins: usize) -> Vec<Vec<usize>> {
    let per = order.len() / bins;
    (0..bins)
        .map(|b| {
            let end = if b + 1 == bins {
                order.len()
            } else {
                (b + 1) * per
            };
            order[b * per..end].to_vec()
        })
        .collect()
}

/// Greedy left-to-right scan closing a bin once its effective sample size
/// `(sum w)^2 / sum w^2` reaches the population's effective size divided by
/// the bin count. Whatever remains after `bins - 1` closures forms the last
/// bin. With equal weights this is exactly the equal-count binning.
fn ratio_bins(pop: &[Observation], order: &[usize], bins: usize) -> Vec<Vec<usize>> {
    let scale = order.iter().fold(0.0f64, |m, &i| m.max(pop[i].weight));
    let w = |i: usize| pop[i].weight / scale;
    let s1: f64 = crate::sum::sum(order.iter().map(|&i| w(i)));
    let s2: f64 = crate::sum::sum(order.iter().map(|&i| w(i) * w(i)));
    let target = ((s1 * s1 / s2) / bins as f64).floor().max(1.0);

    let mut out = Vec::with_capacity(bins);
    let mut current = Vec::new();
    let (mut sum_w, mut sum_w2) = (NeumaierSum::new(), NeumaierSum::new());
    for &i in order {
        current.push(i);
        sum_w += w(i);
        sum_w2 += w(i) * w(i);
        let (a, b) = (sum_w.value(), sum_w2.value());
        if out.len() + 1 < bins && a * a >= target * b {
            out.push(std::mem::take(&mut current));
            sum_w = NeumaierSum::new();
            sum_w2 = NeumaierSum::new();
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn summarize(pop: &[Observation], members: &[usize]) -> Bin {
    let reference = pop[members[0]].weight;
    let mut rel_total = NeumaierSum::new();
    let mut total = NeumaierSum::new();
    let mut score = NeumaierSum::new();
    let mut response = NeumaierSum::new();
    for &i in members {
        let o = &pop[i];
        let rel = o.weight / reference;
        rel_total += rel;
        total += o.weight;
        score += rel * o.score;
        response += rel * o.response;
    }
    Bin {
        avg_score: score.value() / rel_total.value(),
        avg_response: response.value() / rel_total.value(),
        total_weight: total.value(),
        member_count: members.len(),
    }
}

fn score_span<'a, I: IntoIterator<Item = &'a Observation>>(obs: I) -> (f64, f64) {
    obs.into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
            (lo.min(o.score), hi.max(o.score))
        })
}

/// Binned (weighted) averages of score and response for both groups.
/// Empty bins are omitted.
pub fn diagram(
    first: &[Observation],
    second: &[Observation],
    spec: &BinningSpec,
) -> Result<ReliabilityDiagram> {
    for (pop, which) in [(first, "first"), (second, "second")] {
        if pop.is_empty() {
            return Err(Error::EmptySubpopulation(which.into()));
        }
    }
    let smaller = first.len().min(second.len());
    if spec.bin_count == 0 || spec.bin_count > smaller {
        return Err(Error::InvalidBinCount {
            bins: spec.bin_count,
            size: smaller,
        });
    }
    let span = score_span(first.iter().chain(second));
    let per_group = |pop: &[Observation]| -> Result<Vec<Bin>> {
        Ok(compute_bins(pop, spec, span)?
            .iter()
            .filter(|members| !members.is_empty())
            .map(|members| summarize(pop, members))
            .collect())
    };
    Ok(ReliabilityDiagram {
        spec: *spec,
        first: per_group(first)?,
        second: per_group(second)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pop(scores: &[f64]) -> Vec<Observation> {
        scores
            .iter()
            .map(|&s| Observation::new(s, 0.0, "g"))
            .collect()
    }

    fn sizes(bins: &[Vec<usize>]) -> Vec<usize> {
        bins.iter().map(Vec::len).collect()
    }

    #[test]
    fn equal_count_remainder_goes_last() {
        let p = pop(&(0..10).map(|i| i as f64).collect::<Vec<_>>());
        let bins = compute_bins(&p, &BinningSpec::new(BinStrategy::Count, 3), (0.0, 9.0)).unwrap();
        assert_eq!(sizes(&bins), vec![3, 3, 4]);
    }

    #[test]
    fn equal_width_edges_are_tenths() {
        let edges = equal_width_edges(0.0, 1.0, 10);
        assert_eq!(edges.len(), 11);
        for (i, e) in edges.iter().enumerate() {
            assert!((e - i as f64 / 10.0).abs() < 1e-15);
        }
        assert_eq!(edges[0], 0.0);
        assert_eq!(edges[10], 1.0);
    }

    #[test]
    fn equal_width_assignment() {
        let p = pop(&[0.0, 0.05, 0.2, 0.55, 0.99, 1.0]);
        let bins = compute_bins(&p, &BinningSpec::new(BinStrategy::Width, 5), (0.0, 1.0)).unwrap();
        assert_eq!(sizes(&bins), vec![2, 1, 1, 0, 2]);
    }

    #[test]
    fn ratio_with_unit_weights_matches_count() {
        for n in [7usize, 10, 23, 100] {
            let mut p = pop(&(0..n).map(|i| ((i * 37) % n) as f64).collect::<Vec<_>>());
            for o in &mut p {
                o.weight = 2.5;
            }
            for b in 1..=n.min(12) {
                let count =
                    compute_bins(&p, &BinningSpec::new(BinStrategy::Count, b), (0.0, 1.0)).unwrap();
                let ratio =
                    compute_bins(&p, &BinningSpec::new(BinStrategy::Ratio, b), (0.0, 1.0)).unwrap();
                assert_eq!(count, ratio, "n = {n}, bins = {b}");
            }
        }
    }

    #[test]
    fn ratio_bins_isolate_heavy_weights() {
        let mut p = pop(&(0..12).map(|i| i as f64).collect::<Vec<_>>());
        p[0].weight = 100.0;
        let bins = compute_bins(&p, &BinningSpec::new(BinStrategy::Ratio, 3), (0.0, 1.0)).unwrap();
        assert_eq!(bins.iter().map(Vec::len).sum::<usize>(), 12);
        assert_eq!(bins[0], vec![0]);
    }

    #[test]
    fn bin_count_validation() {
        let p = pop(&[0.1, 0.2]);
        assert!(compute_bins(&p, &BinningSpec::new(BinStrategy::Count, 3), (0.0, 1.0)).is_err());
        assert!(compute_bins(&p, &BinningSpec::new(BinStrategy::Count, 0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn one_bin_averages() {
        let a = vec![
            Observation::new(0.2, 1.0, "a"),
            Observation::new(0.4, 0.0, "a"),
        ];
        let d = diagram(&a, &a, &BinningSpec::new(BinStrategy::Count, 1)).unwrap();
        assert!((d.first[0].avg_score - 0.3).abs() < 1e-15);
        assert_eq!(d.first[0].avg_response, 0.5);
        assert_eq!(d.first, d.second);

        let w = vec![
            Observation::weighted(0.2, 1.0, 3.0, "a"),
            Observation::weighted(0.4, 0.0, 1.0, "a"),
        ];
        let d = diagram(&w, &a, &BinningSpec::new(BinStrategy::Width, 1)).unwrap();
        assert!((d.first[0].avg_score - 0.25).abs() < 1e-15);
        assert_eq!(d.first[0].avg_response, 0.75);
        assert_eq!(d.first[0].total_weight, 4.0);
    }

    #[test]
    fn width_bins_share_merged_range() {
        let a = pop(&[0.0, 0.1]);
        let b = pop(&[0.9, 1.0]);
        let d = diagram(&a, &b, &BinningSpec::new(BinStrategy::Width, 2)).unwrap();
        // both of a's scores fall in the lower half of the merged range
        assert_eq!(d.first.len(), 1);
        assert_eq!(d.first[0].member_count, 2);
        assert_eq!(d.second.len(), 1);
    }

    #[test]
    fn strategy_titles() {
        assert_eq!(BinStrategy::Width.title(), "reliability diagram");
        assert_eq!("ratio".parse::<BinStrategy>().unwrap(), BinStrategy::Ratio);
        assert!("bogus".parse::<BinStrategy>().is_err());
    }
}
