use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register name collision: `{0}`")]
    RegisterCollision(String),

    #[error("unknown register: `{0}`")]
    UnknownRegister(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("register layouts differ: {0}")]
    LayoutMismatch(String),

    #[error("bit string length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("probability out of range: {0}")]
    InvalidProbability(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:e} exceeds tolerance")]
    NegativeEigenvalue(f64),

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not an isometry (max deviation {0:e})")]
    NotIsometry(f64),

    #[error("POVM completeness defect {0:e}")]
    Incomplete(f64),

    #[error("budget exceeded: {what} needs dimension {needed}, limit is {limit}")]
    Budget {
        what: String,
        needed: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn budget(what: impl Into<String>, needed: usize, limit: usize) -> Self {
        Error::Budget {
            what: what.into(),
            needed,
            limit,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
