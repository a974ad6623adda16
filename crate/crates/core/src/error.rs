use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("initial support escapes the grid on axis {axis}: need [{need_lo}, {need_hi}] inside [{lo}, {hi}]")]
    SupportEscapesGrid {
        axis: usize,
        need_lo: f64,
        need_hi: f64,
        lo: f64,
        hi: f64,
    },
    #[error("unknown initializer `{0}`")]
    UnknownInitializer(String),
    #[error("wave function has zero norm")]
    ZeroNorm,
    #[error("stability precondition violated: {0}")]
    Stability(String),
    #[error("non-finite amplitude detected at step {step}")]
    NonFinite { step: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("velocity field is masked on every node")]
    AllNodesMasked,
    #[error("trajectory left the grid at t = {t}: position {position:?}")]
    LeftGrid { t: f64, position: [f64; 2] },
    #[error("start point {0:?} lies in a masked (near-node) region")]
    StartInNode([f64; 2]),
    #[error("{failed} of {total} ensemble members failed (first: {first})")]
    EnsembleFailure {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("density vanishes on the whole grid")]
    ZeroDensity,
    #[error("operator is not Hermitian (max |M - M^H| = {0:e})")]
    NonHermitian(f64),
    #[error("vectors are not orthonormal (max deviation {0:e})")]
    NonOrthonormal(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),
    #[error(
        "spin packets not separated at readout: separation {separation:.3}, required {required:.3}"
    )]
    PacketsNotSeparated { separation: f64, required: f64 },
    #[error("state is not a two-qubit (2 x 2) state: factor dimension {0}")]
    NonQubitState(usize),
    #[error("dimension {dim} too small or unsupported: {reason}")]
    Dimension { dim: usize, reason: String },
    #[error("step `{step}` failed: {source}")]
    Step {
        step: String,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("check failed: {0}")]
    Assertion(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. }
            | Error::Stability(_)
            | Error::AllNodesMasked
            | Error::LeftGrid { .. }
            | Error::EnsembleFailure { .. }
            | Error::ZeroDensity
            | Error::ZeroNorm
            | Error::PacketsNotSeparated { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
