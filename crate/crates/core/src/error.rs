use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input is rational: {0}")]
    RationalInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("coefficient stream exhausted at index {index}")]
    StreamExhausted { index: usize },

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("nearest integer to q_{k}*beta is undetermined (value within precision of a half-integer)")]
    TieUnresolved { k: usize },

    #[error(
        "alpha is of golden type (coefficients eventually all 1): T_alpha would not be rank-one, \
         it is not even surjective"
    )]
    GoldenTypeRejected,

    #[error("orbit does not resolve in the built column; needs depth {required}")]
    NeedsDeeperStage { required: usize },

    #[error("orbit never resolves: the point has no preimage at any finite stage")]
    NoPreimage,

    #[error("depth {requested} unavailable (tower built to depth {built})")]
    DepthUnavailable { requested: usize, built: usize },

    #[error("column height q_{stage} does not fit in 64 bits")]
    HeightOverflow { stage: usize },

    #[error("level sets live at different stages ({0} vs {1})")]
    StageMismatch(usize, usize),

    #[error("codes describe the same point")]
    SamePoint,

    #[error("depth cap {cap} exceeded (needed {required})")]
    DepthCapExceeded { cap: usize, required: usize },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("no ratio-set witness found: {0}")]
    WitnessNotFound(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}
