use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("edge intensity matrix is not symmetric at ({row}, {col})")]
    AsymmetricP { row: usize, col: usize },

    #[error("negative or non-finite entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("block fractions must be positive and sum to one (sum = {sum})")]
    PiNotSimplex { sum: f64 },

    #[error("row sums of P·Π differ: row {row} has {value}, row 0 has {expected}")]
    DegreeRowMismatch { row: usize, value: f64, expected: f64 },

    #[error("average degree {degree} is not above 1; detection is impossible")]
    SubcriticalDegree { degree: f64 },

    #[error("edge probability P[{row}][{col}]/n = {prob} exceeds 1")]
    ProbabilityOverflow { row: usize, col: usize, prob: f64 },

    #[error("index {index} is outside the {count} informative eigenvalues")]
    IndexOutOfInformativeRange { index: usize, count: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop on vertex {vertex} (line {line})")]
    SelfLoopRejected { line: usize, vertex: usize },

    #[error("duplicate edge {{{u}, {v}}} (line {line})")]
    DuplicateEdgeRejected { line: usize, u: usize, v: usize },

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("t² equals w² = {weight_sq} for edge ({u}, {v})")]
    PoleAtWeight { u: usize, v: usize, weight_sq: f64 },

    #[error("graph too large for dense determinants (n = {n}, m = {m})")]
    TooLargeForDense { n: usize, m: usize },

    #[error("parameter must be nonzero")]
    ZeroParameter,

    #[error("sample z = {0} is a trivial eigenvalue (±1)")]
    TrivialSample(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },

    #[error("factorization broke down near shift {shift}")]
    FactorizationBreakdown { shift: f64 },

    #[error("requested real-extremal eigenvalue {re}{im:+}i is dominated by its imaginary part")]
    ComplexDominance { re: f64, im: f64 },

    #[error("eigenvalue {lambda} lies inside the complementary spectrum; the bound is vacuous")]
    GapZero { lambda: f64 },

    #[error("label vectors have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("model has no informative eigenvalue (all μ² ≤ d)")]
    BelowThreshold,

    #[error("invalid binary eigenvector data: {0}")]
    InvalidBinary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
