use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Columns (indices into the design) that are linear combinations of earlier ones.
    #[error("rank-deficient design: columns {columns:?} are linearly dependent on earlier columns")]
    RankDeficient { columns: Vec<usize> },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("subset search over {p} predictors exceeds the enumeration limit of {limit}")]
    TooManyPredictors { p: usize, limit: usize },

    #[error("lasso did not converge after {sweeps} sweeps (KKT violation {violation:e})")]
    LassoNotConverged {
        sweeps: usize,
        violation: f64,
        coefficients: Vec<f64>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("column `{label}`: {source}")]
    Column {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("window {index}: {source}")]
    Window {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("firm `{firm}`: {source}")]
    Firm {
        firm: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no data in {}", .0.display())]
    NoData(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_column(self, label: impl Into<String>) -> Self {
        Error::Column {
            label: label.into(),
            source: Box::new(self),
        }
    }

    pub fn in_window(self, index: usize) -> Self {
        Error::Window {
            index,
            source: Box::new(self),
        }
    }

    pub fn in_firm(self, firm: impl Into<String>) -> Self {
        Error::Firm {
            firm: firm.into(),
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::RankDeficient { .. }
            | Error::LassoNotConverged { .. }
            | Error::Numerical(_) => true,
            Error::Column { source, .. }
            | Error::Window { source, .. }
            | Error::Firm { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Process exit code: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}
