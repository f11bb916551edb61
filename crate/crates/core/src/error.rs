use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("degenerate front: both states equal {0}")]
    DegenerateFront(f64),

    #[error("front tracking exceeded {0} interactions")]
    TooManyInteractions(usize),

    #[error("{0}")]
    Unsupported(String),

    #[error("not a weak-solution gradient field: loop defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotGradientField { defect: f64, tolerance: f64 },

    #[error("field too rough to probe: {clean} of {total} nodes admit clean fits")]
    TooRough { clean: usize, total: usize },

    #[error("shift set empty: r = {r} is below 4 * mesh = {min}")]
    EmptyShiftSet { r: f64, min: f64 },

    #[error("{op}: precondition violated: {msg}")]
    Precondition { op: &'static str, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{op} failed")]
    Verifier {
        op: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition { op, msg: msg.into() }
    }
}
