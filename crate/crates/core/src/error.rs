use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("response type does not match the {0} family")]
    FamilyMismatch(&'static str),

    #[error("linear predictor overflow while evaluating the {0} likelihood")]
    EvaluationOverflow(&'static str),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("constant column `{0}` has zero standard deviation")]
    ConstantColumn(String),

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("rank-deficient information matrix; offending columns {columns:?}")]
    RankDeficient { columns: Vec<usize> },

    #[error("singular correlation matrix among columns {columns:?}")]
    Collinear { columns: Vec<usize> },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("lasso path failed to converge at lambda = {lambda:.6e}")]
    PathNonConvergence { lambda: f64 },

    #[error("malformed interval [{lower}, {upper}]")]
    MalformedInterval { lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    Parameterization(String),

    #[error("stage {stage} failed (candidate set {candidates:?}): {source}")]
    Stage {
        stage: u8,
        candidates: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for usage, configuration and input problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::InvalidData(_)
            | Error::ConstantColumn(_)
            | Error::FamilyMismatch(_) => 2,
            _ => 3,
        }
    }
}
