use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factor `{name}`: {reason}")]
    InvalidFactor { name: String, reason: String },

    #[error("polynomial degree {degree} is out of range 1..={max}")]
    InvalidDegree { degree: usize, max: usize },

    #[error("invalid spline knots: {0}")]
    InvalidKnots(String),

    #[error("degenerate scores: {0}")]
    DegenerateScores(String),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid g-and-h parameters: {0}")]
    InvalidShape(String),

    #[error(
        "factor `{name}` has {levels} levels; score estimation needs at least 3 \
         (encode a binary factor directly, e.g. as a degree-1 contrast)"
    )]
    TooFewLevels { name: String, levels: usize },

    #[error("design matrix is rank deficient (rank {rank} of {columns}); column `{column}` is linearly dependent")]
    SingularDesign {
        rank: usize,
        columns: usize,
        column: String,
    },

    #[error("{n} observations are not enough for {p} coefficients")]
    InsufficientData { n: usize, p: usize },

    #[error("IRLS did not converge after {iterations} iterations: {diagnostics}")]
    IrlsDidNotConverge {
        iterations: usize,
        diagnostics: String,
    },

    #[error("response is not valid for the {family} family: {reason}")]
    InvalidResponse { family: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
