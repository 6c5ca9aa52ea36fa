//! Neumaier-compensated accumulation.

use std::ops::AddAssign;

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        let t = self.sum + rhs;
        if self.sum.abs() >= rhs.abs() {
            self.compensation += (self.sum - t) + rhs;
        } else {
            self.compensation += (rhs - t) + self.sum;
        }
        self.sum = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Running compensated prefix sums: `out[j] = values[0] + ... + values[j-1]`,
/// with `out[0] = 0` and `out.len() == values.len() + 1`.
pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    for &v in values {
        acc += v;
        out.push(acc.value());
    }
    out
}
