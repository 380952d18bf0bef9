use thiserror::Error;

/// Errors raised by simulation, prediction and certification routines.
///
/// Scalar payloads are widened to `f64` so the type does not depend on the
/// scalar parameter of the routine that produced it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("time {t} is outside the reference domain [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("non-finite value during {context} at t = {t}")]
    Overflow { t: f64, context: String },

    #[error("singular input Jacobian at t = {t} (rcond = {rcond:e}, x = {x:?}, u = {u:?})")]
    SingularJacobian {
        t: f64,
        x: Vec<f64>,
        u: Vec<f64>,
        rcond: f64,
    },

    #[error("predictor input Jacobian is singular (rcond = {rcond:e})")]
    SingularPredictor { rcond: f64 },

    #[error("degenerate polynomial structure: {0}")]
    DegenerateStructure(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("negative arclength separation {gap} m: follower is ahead of its leader")]
    NegativeArclength { gap: f64 },

    #[error("controller variant `{0}` requires the reference derivative")]
    MissingReferenceRate(&'static str),

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
}

impl Error {
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::SingularJacobian { .. } | Error::SingularPredictor { .. }
        )
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::Overflow { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
