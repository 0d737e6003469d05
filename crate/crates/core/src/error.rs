use thiserror::Error;

/// Errors produced by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario parameter `{0}` must be at least 1")]
    ZeroParameter(&'static str),

    #[error("label out of range: {0}")]
    LabelOutOfRange(String),

    #[error("dimension cap exceeded: {what} is {actual}, cap is {cap}")]
    DimensionCap {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    #[error("scenario mismatch between inputs")]
    ScenarioMismatch,

    #[error("box is not a valid member of the polytope ({0} violated rows)")]
    InvalidBox(usize),

    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("constraint support is not a clique: events {0} and {1} are not adjacent")]
    NotAClique(usize, usize),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not a projection: {0}")]
    NotAProjection(String),

    #[error("measurement is incomplete: {0}")]
    IncompletePvm(String),

    #[error("assemblage entry {0} has rank above one")]
    RankTooHigh(String),

    #[error("assemblage violates {0} no-signaling, normalization, or positivity conditions")]
    InvalidAssemblage(usize),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("line fits no known type")]
    Unclassifiable,

    #[error("solver reached the iteration cap without a decision")]
    SolverUndecided,

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("state is not genuinely tripartite entangled")]
    NotGenuine,

    #[error("search exhausted after {0} attempts")]
    SearchExhausted(usize),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
}

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
