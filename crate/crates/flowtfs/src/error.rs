//! Crate-wide error and result types.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the pipeline, from CSV ingestion to
/// weight fitting. Pipeline stages wrap their causes in [`Error::Stage`]
/// so callers can tell where a failure originated.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),

    #[error("missing required column `{0}` in csv header")]
    MissingColumn(String),

    #[error("zero parseable rows in `{path}` ({skipped} rows skipped)")]
    ZeroParseableRows { path: PathBuf, skipped: usize },

    #[error("preprocessing removed every row during {0}")]
    EmptyAfterPreprocess(&'static str),

    #[error("dataset contains a single class; both benign and malicious rows are required")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature arity mismatch: model expects {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("non-finite value for feature `{0}`")]
    NonFiniteInput(String),

    #[error("training diverged: non-finite loss in epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("both feature sets are empty; overlap is undefined")]
    EmptyFeatureSets,

    #[error("target architecture descriptor has zero norm")]
    ZeroNormDescriptor,

    #[error("empty sample passed to wasserstein distance")]
    EmptySample,

    #[error("datasets are not normalized with a shared scaler: {0}")]
    ScalerMismatch(String),

    #[error("no shared features available for data homogeneity")]
    EmptySharedFeatures,

    #[error("need at least {min} observations, got {got}")]
    InsufficientObservations { min: usize, got: usize },

    #[error(
        "normal equations are rank-deficient (condition number {condition:.3e}); \
         collinear columns: {}", columns.join(", ")
    )]
    RankDeficient { condition: f64, columns: Vec<String> },

    #[error("attack input must be labeled malicious")]
    NotMalicious,

    #[error(
        "perturbable features cannot influence the surrogate: \
         it observes none of {}", affected.join(", ")
    )]
    AttackIneffective { affected: Vec<String> },

    #[error("attack results do not match the evaluated dataset: {0}")]
    ResultMismatch(String),

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Innermost cause, unwrapping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
