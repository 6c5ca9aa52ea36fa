//! Comparing the outcomes of two subpopulations matched on real-valued
//! scores, without binning.
//!
//! The two groups' scores are merged, sorted, and cut into alternating
//! single-group blocks. Centered second-order differences between
//! neighboring blocks accumulate into a cumulative series whose secant
//! slopes estimate the average response difference over ranges of score.
//! The series collapses to the Kolmogorov-Smirnov statistic `G` (maximum
//! absolute value) and the Kuiper statistic `H` (range), both judged
//! against the scale `sigma` of purely random fluctuation. Classical
//! binned reliability diagrams are provided for comparison.
//!
//! ```
//! use cumdiff::{compare, Observation};
//!
//! let first: Vec<_> = [(0.1, 1.0), (0.3, 1.0), (0.5, 1.0)]
//!     .iter().map(|&(s, r)| Observation::new(s, r, "a")).collect();
//! let second: Vec<_> = [(0.2, 0.0), (0.4, 0.0), (0.6, 0.0)]
//!     .iter().map(|&(s, r)| Observation::new(s, r, "b")).collect();
//! let cmp = compare(&first, &second).unwrap();
//! assert_eq!(cmp.stats.n, 4);
//! assert_eq!(*cmp.series.c.last().unwrap(), 1.0);
//! ```

pub mod blocking;
pub mod cli;
pub mod cumulative;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod reliability;
pub mod render;
pub mod sum;
pub mod summary;
pub mod synthgen;

pub use error::{Error, Result};
pub use ingest::{Dataset, Observation};
pub use pipeline::{compare, Comparison};
