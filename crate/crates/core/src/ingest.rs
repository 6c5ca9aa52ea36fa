//! Tabular input, score de-duplication, and pair selection.
//!
//! Input is delimiter-separated UTF-8 text with a header row naming the
//! columns `score`, `response`, `group` and optionally `weight`. Extra
//! columns are ignored. Rows whose weight is zero are dropped.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub score: f64,
    pub response: f64,
    pub weight: f64,
    pub group: String,
}

impl Observation {
    pub fn new(score: f64, response: f64, group: impl Into<String>) -> Self {
        Self {
            score,
            response,
            weight: 1.0,
            group: group.into(),
        }
    }

    pub fn weighted(score: f64, response: f64, weight: f64, group: impl Into<String>) -> Self {
        Self {
            score,
            response,
            weight,
            group: group.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    group_labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, dropping zero-weight observations. Group labels are
    /// kept in order of first appearance.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let observations: Vec<Observation> = observations
            .into_iter()
            .filter(|o| o.weight != 0.0)
            .collect();
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut group_labels: Vec<String> = Vec::new();
        for o in &observations {
            if !group_labels.iter().any(|g| g == &o.group) {
                group_labels.push(o.group.clone());
            }
        }
        Ok(Self {
            observations,
            group_labels,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn has_uniform_weights(&self) -> bool {
        uniform_weights(&self.observations)
    }
}

pub fn uniform_weights(observations: &[Observation]) -> bool {
    observations
        .first()
        .is_none_or(|first| observations.iter().all(|o| o.weight == first.weight))
}

/// True when every response is exactly 0 or 1.
pub fn all_bernoulli<'a, I: IntoIterator<Item = &'a Observation>>(observations: I) -> bool {
    observations
        .into_iter()
        .all(|o| o.response == 0.0 || o.response == 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub delimiter: u8,
    /// Fail when the header has no `weight` column.
    pub require_weights: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            require_weights: false,
        }
    }
}

pub fn parse_dataset<R: Read>(source: R, options: &ParseOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let column = |name: &'static str| headers.iter().position(|h| h == name);
    let score_col = column("score").ok_or(Error::MissingColumn("score"))?;
    let response_col = column("response").ok_or(Error::MissingColumn("response"))?;
    let group_col = column("group").ok_or(Error::MissingColumn("group"))?;
    let weight_col = column("weight");
    if options.require_weights && weight_col.is_none() {
        return Err(Error::MissingColumn("weight"));
    }

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => Error::MalformedRow {
                line: pos.line(),
                message: e.to_string(),
            },
            None => Error::Csv(e),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &'static str| -> Result<&str> {
            record.get(col).ok_or_else(|| Error::MalformedRow {
                line,
                message: format!("missing {name} field"),
            })
        };
        let number = |col: usize, name: &'static str| -> Result<f64> {
            let text = field(col, name)?;
            let value: f64 = text.parse().map_err(|_| Error::MalformedRow {
                line,
                message: format!("cannot parse {name} {text:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    line,
                    column: name,
                    value: text.to_string(),
                });
            }
            Ok(value)
        };

        let score = number(score_col, "score")?;
        let response = number(response_col, "response")?;
        let weight = match weight_col {
            Some(col) => number(col, "weight")?,
            None => 1.0,
        };
        if weight < 0.0 {
            return Err(Error::MalformedRow {
                line,
                message: format!("negative weight {weight}"),
            });
        }
        if weight == 0.0 {
            continue;
        }
        let group = field(group_col, "group")?;
        if group.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty group label".into(),
            });
        }
        observations.push(Observation::weighted(score, response, weight, group));
    }
    Dataset::new(observations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// Jitter is a fraction of the span (max - min) of all scores.
    RelativeToRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationPolicy {
    pub relative_magnitude: f64,
    pub seed: u64,
    pub mode: PerturbationMode,
}

pub const DEFAULT_PERTURBATION: f64 = 1e-8;
const MAX_ESCALATIONS: u32 = 3;

impl PerturbationPolicy {
    pub fn new(relative_magnitude: f64, seed: u64) -> Result<Self> {
        if !(relative_magnitude > 0.0 && relative_magnitude < 1e-3) {
            return Err(Error::InvalidPerturbation(relative_magnitude));
        }
        Ok(Self {
            relative_magnitude,
            seed,
            mode: PerturbationMode::RelativeToRange,
        })
    }
}

impl Default for PerturbationPolicy {
    fn default() -> Self {
        Self {
            relative_magnitude: DEFAULT_PERTURBATION,
            seed: 0,
            mode: PerturbationMode::RelativeToRange,
        }
    }
}

/// Makes every score distinct by jittering only the observations whose
/// score is shared with another observation.
///
/// Each tied score `v` receives uniform draws from `[v - h, v + h]`, where
/// `h` is the policy magnitude times the score span, capped at half the gap
/// to the nearest distinct neighbor so that originally distinct scores keep
/// their order. The sorted draws are handed out in input order. On a
/// collision the magnitude is escalated tenfold, at most three times.
pub fn perturb_scores(data: &Dataset, policy: &PerturbationPolicy) -> Result<Dataset> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scores: Vec<f64> = data.observations.iter().map(|o| o.score).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));

    let runs = tied_runs(&scores, &order);
    if runs.is_empty() {
        return Ok(data.clone());
    }

    let lo = scores[order[0]];
    let hi = scores[order[order.len() - 1]];
    let base = if hi > lo {
        hi - lo
    } else if lo != 0.0 {
        lo.abs()
    } else {
        1.0
    };

    let mut magnitude = policy.relative_magnitude;
    for attempt in 0..=MAX_ESCALATIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed.wrapping_add(attempt as u64));
        if let Some(jittered) = jitter_runs(&scores, &order, &runs, magnitude * base, &mut rng) {
            let mut out = data.clone();
            for (o, s) in out.observations.iter_mut().zip(jittered) {
                o.score = s;
            }
            return Ok(out);
        }
        magnitude *= 10.0;
    }
    Err(Error::PerturbationFailed {
        magnitude: policy.relative_magnitude * 10f64.powi(MAX_ESCALATIONS as i32),
    })
}

/// Ranges `start..end` into `order` whose scores are all equal, length > 1.
fn tied_runs(scores: &[f64], order: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=order.len() {
        if i == order.len() || scores[order[i]] != scores[order[start]] {
            if i - start > 1 {
                runs.push((start, i));
            }
            start = i;
        }
    }
    runs
}

fn jitter_runs(
    scores: &[f64],
    order: &[usize],
    runs: &[(usize, usize)],
    half_width: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    let mut out = scores.to_vec();
    for &(start, end) in runs {
        let v = scores[order[start]];
        let below = (start > 0).then(|| scores[order[start - 1]]);
        let above = (end < order.len()).then(|| scores[order[end]]);
        let mut h = half_width;
        if let Some(p) = below {
            h = h.min((v - p) / 2.0);
        }
        if let Some(q) = above {
            h = h.min((q - v) / 2.0);
        }
        let mut draws: Vec<f64> = (start..end).map(|_| v + rng.gen_range(-h..=h)).collect();
        draws.sort_by(f64::total_cmp);
        if draws.windows(2).any(|w| w[0] >= w[1])
            || below.is_some_and(|p| draws[0] <= p)
            || above.is_some_and(|q| draws[draws.len() - 1] >= q)
        {
            return None;
        }
        // `order` lists tied members by input index, so ties break by input order.
        for (k, &idx) in order[start..end].iter().enumerate() {
            out[idx] = draws[k];
        }
    }
    Some(out)
}

/// Splits out the observations of two groups, `first` then `second`.
pub fn select_pair(
    data: &Dataset,
    first: &str,
    second: &str,
) -> Result<(Vec<Observation>, Vec<Observation>)> {
    if first == second {
        return Err(Error::SameGroup(first.to_string()));
    }
    for label in [first, second] {
        if !data.group_labels.iter().any(|g| g == label) {
            return Err(Error::UnknownGroup(label.to_string()));
        }
    }
    let pick = |label: &str| -> Vec<Observation> {
        data.observations
            .iter()
            .filter(|o| o.group == label)
            .cloned()
            .collect()
    };
    Ok((pick(first), pick(second)))
}
