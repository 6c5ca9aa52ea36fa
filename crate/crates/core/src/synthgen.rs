//! Synthetic two-group data with known expected responses.
//!
//! Four ground-truth models. The second group's scores are uniform on
//! `[0, 1]` in all of them; the first group's scores are a monotone transform
//! of uniform draws. Responses are Bernoulli draws at the expected values.
//!
//! The expected-response functions:
//!
//! 1. `s` and `s^2`, exchanged between the groups on `[0.88, 0.92]`;
//! 2. `s` raised by `0.3` where `sin(5 pi s) > 0` and left alone where it
//!    is negative (jumps at multiples of 0.2), against `s`;
//! 3. a sinusoid `(s/2)(1 + sin(20 pi s))` between 0 and the diagonal,
//!    against values drawn uniformly at random per observation;
//! 4. `s` for both groups, i.e. no difference at all.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cumulative::CumulativeSeries;
use crate::error::{Error, Result};
use crate::ingest::Observation;
use crate::pipeline::compare;

pub const FIRST_LABEL: &str = "first";
pub const SECOND_LABEL: &str = "second";
pub const DEFAULT_FIRST_SIZE: usize = 10_000;
pub const DEFAULT_SECOND_SIZE: usize = 7_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Example1,
    Example2,
    Example3,
    Example4,
}

impl Example {
    pub const ALL: [Example; 4] = [
        Example::Example1,
        Example::Example2,
        Example::Example3,
        Example::Example4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Example::Example1 => "example1",
            Example::Example2 => "example2",
            Example::Example3 => "example3",
            Example::Example4 => "example4",
        }
    }

    /// Maps a uniform draw `x` to a first-group score.
    pub fn first_score(self, x: f64) -> f64 {
        match self {
            Example::Example1 | Example::Example4 => 0.5 * (1.0 + 8.0 * (x - 0.5).powi(3)),
            Example::Example2 => x.powi(5),
            Example::Example3 => 0.5 * (1.0 + 2f64.cbrt() * (x - 0.5).cbrt()),
        }
    }

    pub fn expected_first(self, s: f64) -> f64 {
        match self {
            Example::Example1 => {
                if swap_window(s) {
                    s * s
                } else {
                    s
                }
            }
            Example::Example2 => (s + 0.15 * (1.0 + sign((5.0 * PI * s).sin()))).clamp(0.0, 1.0),
            Example::Example3 => 0.5 * s * (1.0 + (20.0 * PI * s).sin()),
            Example::Example4 => s,
        }
    }

    /// `None` for example 3, whose second-group expectations are random.
    pub fn expected_second(self, s: f64) -> Option<f64> {
        match self {
            Example::Example1 => Some(if swap_window(s) { s } else { s * s }),
            Example::Example2 | Example::Example4 => Some(s),
            Example::Example3 => None,
        }
    }
}

fn swap_window(s: f64) -> bool {
    (0.88..=0.92).contains(&s)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyntheticModel {
    pub example: Example,
    pub size0: usize,
    pub size1: usize,
    pub seed: u64,
}

impl SyntheticModel {
    pub fn new(example: Example, seed: u64) -> Self {
        Self {
            example,
            size0: DEFAULT_FIRST_SIZE,
            size1: DEFAULT_SECOND_SIZE,
            seed,
        }
    }

    pub fn with_sizes(mut self, size0: usize, size1: usize) -> Self {
        self.size0 = size0;
        self.size1 = size1;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthGroup {
    First,
    Second,
}

impl SynthGroup {
    pub fn label(self) -> &'static str {
        match self {
            SynthGroup::First => FIRST_LABEL,
            SynthGroup::Second => SECOND_LABEL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthPoint {
    pub score: f64,
    pub expected_response: f64,
    pub group: SynthGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub model: SyntheticModel,
    /// First-group points, then second-group points.
    pub points: Vec<TruthPoint>,
}

impl GroundTruth {
    fn observations_with(
        &self,
        response: impl Fn(&TruthPoint) -> f64,
    ) -> (Vec<Observation>, Vec<Observation>) {
        let mut first = Vec::with_capacity(self.model.size0);
        let mut second = Vec::with_capacity(self.model.size1);
        for p in &self.points {
            let o = Observation::new(p.score, response(p), p.group.label());
            match p.group {
                SynthGroup::First => first.push(o),
                SynthGroup::Second => second.push(o),
            }
        }
        (first, second)
    }
}

pub fn generate(model: &SyntheticModel) -> GroundTruth {
    let ex = model.example;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut points = Vec::with_capacity(model.size0 + model.size1);
    for _ in 0..model.size0 {
        let score = ex.first_score(rng.gen::<f64>());
        points.push(TruthPoint {
            score,
            expected_response: ex.expected_first(score),
            group: SynthGroup::First,
        });
    }
    let second_scores: Vec<f64> = (0..model.size1).map(|_| rng.gen::<f64>()).collect();
    for score in second_scores {
        let expected_response = match ex.expected_second(score) {
            Some(p) => p,
            None => rng.gen::<f64>(),
        };
        points.push(TruthPoint {
            score,
            expected_response,
            group: SynthGroup::Second,
        });
    }
    GroundTruth {
        model: *model,
        points,
    }
}

/// Independent Bernoulli draws at each expected response, unit weights.
pub fn sample_responses(truth: &GroundTruth, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    truth
        .points
        .iter()
        .map(|p| {
            let hit = rng.gen::<f64>() < p.expected_response;
            Observation::new(p.score, if hit { 1.0 } else { 0.0 }, p.group.label())
        })
        .collect()
}

/// Splits sampled observations into first and second groups.
pub fn split_groups(observations: Vec<Observation>) -> (Vec<Observation>, Vec<Observation>) {
    observations
        .into_iter()
        .partition(|o| o.group == FIRST_LABEL)
}

/// The noiseless series obtained by substituting expected responses for
/// the sampled ones.
pub fn expected_series(truth: &GroundTruth) -> Result<CumulativeSeries> {
    let (first, second) = truth.observations_with(|p| p.expected_response);
    Ok(compare(&first, &second)?.series)
}
