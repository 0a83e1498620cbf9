use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record on line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("no interaction events")]
    EmptyEventSet,
    #[error("pruning removed every user and item")]
    EmptyAfterPrune,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("graph has a zero-degree {0}; prune before fitting")]
    ZeroDegreeNode(&'static str),
    #[error("power iteration did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("no ideological dimension: leading singular value {0:e} is numerically zero")]
    DegenerateDimension(f64),
    #[error("anchor user {0:?} is not in the graph")]
    UnknownAnchor(String),
    #[error("user coordinates have zero variance")]
    ZeroVariance,
    #[error("cannot fold in a point with no counterparties")]
    EmptySharerSet,
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("no user qualifies for evaluation")]
    NoEvaluableUsers,
    #[error("holdout set is empty")]
    EmptyHoldout,
    #[error("intra-list distance needs at least two items")]
    TooFewItems,
    #[error("position list is empty")]
    EmptyList,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical core rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged(_) | Error::DegenerateDimension(_) | Error::ZeroVariance
        )
    }
}
