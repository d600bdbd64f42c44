use std::path::PathBuf;

/// Errors produced by ingestion, clustering and reporting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed table: {0}")]
    Table(#[from] csv::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("projection origin lies on a pole (lat0 = {0})")]
    PolarOrigin(f64),
    #[error("point set is empty")]
    EmptyPoints,
    #[error("need at least {needed} distinct points, found {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("no ships in grouping")]
    NoShips,
    #[error("exhaustive enumeration refused for K = {0} (limit is 20)")]
    TooManyCenters(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid placement file: {0}")]
    InvalidPlacement(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the input data rather than by configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Read { .. }
                | Error::Table(_)
                | Error::MissingColumn(_)
                | Error::InvalidRegion(_)
                | Error::EmptyPoints
                | Error::InsufficientPoints { .. }
                | Error::NoShips
                | Error::InvalidPlacement(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
