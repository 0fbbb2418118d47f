use std::fmt;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(FormatError),

    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("metadata header has no `sample_id` column")]
    MissingIdColumn,

    #[error("score {score} for `{id}` is outside [0, 1]")]
    ScoreOutOfRange { id: String, score: f64 },

    #[error("score row references unknown sample `{0}`")]
    UnknownScoreId(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("target dimension {requested} exceeds the maximum {max}")]
    DimensionTooLarge { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid k: {0}")]
    BadK(String),

    #[error("silhouette needs at least two non-empty clusters")]
    SingleCluster,

    #[error("join mismatch: {} embedding(s) without a record {:?}, {} record(s) without an embedding {:?}", .missing_records.len(), .missing_records, .orphan_records.len(), .orphan_records)]
    JoinMismatch {
        /// Embedded samples that have no metadata record.
        missing_records: Vec<String>,
        /// Records whose sample id has no embedding.
        orphan_records: Vec<String>,
    },

    #[error("no sample carries a score")]
    ScoreMissing,

    #[error("cluster {0} is empty or does not exist")]
    EmptyCluster(usize),

    #[error("no attributions available to compose a booster")]
    NoAttributions,

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("run `{run}` has no score for {} sample(s), first `{}`", .missing.len(), .missing[0])]
    MissingRunScores { run: String, missing: Vec<String> },

    #[error("baseline run `{0}` not found")]
    UnknownBaseline(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format(_) => "FormatError",
            Error::DuplicateId(_) => "DuplicateId",
            Error::NonFinite(_) => "NonFinite",
            Error::MissingIdColumn => "MissingIdColumn",
            Error::ScoreOutOfRange { .. } => "ScoreOutOfRange",
            Error::UnknownScoreId(_) => "UnknownScoreId",
            Error::InvalidValue(_) => "InvalidValue",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::BadK(_) => "BadK",
            Error::SingleCluster => "SingleCluster",
            Error::JoinMismatch { .. } => "JoinMismatch",
            Error::ScoreMissing => "ScoreMissing",
            Error::EmptyCluster(_) => "EmptyCluster",
            Error::NoAttributions => "NoAttributions",
            Error::UnknownFeature(_) => "UnknownFeature",
            Error::MissingRunScores { .. } => "MissingRunScores",
            Error::UnknownBaseline(_) => "UnknownBaseline",
            Error::Config(_) => "ConfigError",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
            Error::Io(_) => "IoError",
        }
    }
}

/// A malformed binary container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    /// Zero-based image index inside a patch-grid stream, when known.
    pub image: Option<usize>,
    pub reason: String,
}

impl FormatError {
    pub(crate) fn new(reason: impl Into<String>) -> Self {
        Self {
            image: None,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_image(image: usize, reason: impl Into<String>) -> Self {
        Self {
            image: Some(image),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.image {
            Some(i) => write!(f, "image {i}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

impl From<FormatError> for Error {
    fn from(e: FormatError) -> Self {
        Error::Format(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
