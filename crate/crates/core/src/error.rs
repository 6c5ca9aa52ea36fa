use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: non-finite {column} value {value:?}")]
    NonFinite {
        line: u64,
        column: &'static str,
        value: String,
    },

    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("could not make scores distinct at relative magnitude {magnitude:e}; retry with a larger perturbation")]
    PerturbationFailed { magnitude: f64 },

    #[error("invalid perturbation magnitude {0:e}: must be positive and below 1e-3")]
    InvalidPerturbation(f64),

    #[error("unknown group label `{0}`")]
    UnknownGroup(String),

    #[error("both groups are `{0}`; a comparison needs two different groups")]
    SameGroup(String),

    #[error("need at least two groups to compare, found {0}")]
    TooFewGroups(usize),

    #[error("subpopulation `{0}` has no observations")]
    EmptySubpopulation(String),

    #[error("duplicate score {0} across the merged subpopulations; scores must be distinct")]
    DuplicateScore(f64),

    #[error("only {0} blocks after interleaving; at least 3 are needed")]
    TooFewBlocks(usize),

    #[error("invalid bin count {bins} for a subpopulation of {size} observations")]
    InvalidBinCount { bins: usize, size: usize },

    #[error("unknown synthetic example `{0}`")]
    UnknownExample(String),

    #[error("malformed series table: {0}")]
    MalformedSeries(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by how the tool was invoked rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownGroup(_)
                | Error::TooFewGroups(_)
                | Error::SameGroup(_)
                | Error::UnknownExample(_)
                | Error::InvalidPerturbation(_)
        )
    }
}
