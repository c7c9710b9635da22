use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A label file line could not be tokenized into `class cx cy w h`.
    #[error("{source_name}: line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("duplicate image id `{0}`")]
    DuplicateId(String),

    #[error("entry `{id}`: {message}")]
    Entry { id: String, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("class `{class}` needs {requested} synthetic images but only {available} are available (deficit {deficit})")]
    Shortfall {
        class: String,
        requested: usize,
        available: usize,
        deficit: usize,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::DuplicateId(_) => "duplicate_id",
            Error::Entry { .. } => "entry",
            Error::Argument(_) => "argument",
            Error::Config(_) => "config",
            Error::Shortfall { .. } => "shortfall",
            Error::EmptyDataset(_) => "empty_dataset",
            Error::Numerical(_) => "numerical",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
