use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SINGULAR: i32 = 3;
    pub const OVERFLOW: i32 = 4;
    pub const NOT_CERTIFIED: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] nrflow::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => exit::CONFIG,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } | CliError::Csv { .. } => exit::FAILURE,
        }
    }
}

pub fn core_exit_code(e: &nrflow::Error) -> i32 {
    use nrflow::Error as E;
    if e.is_singular() {
        return exit::SINGULAR;
    }
    if e.is_overflow() {
        return exit::OVERFLOW;
    }
    match e {
        E::InvalidInput(_)
        | E::DimensionMismatch { .. }
        | E::OutOfRange { .. }
        | E::MissingReferenceRate(_)
        | E::UnsupportedDimension(_) => exit::CONFIG,
        _ => exit::FAILURE,
    }
}

/// Short machine-friendly label for a run outcome.
pub fn status_label(e: Option<&nrflow::Error>) -> &'static str {
    use nrflow::Error as E;
    match e {
        None => "ok",
        Some(E::SingularJacobian { .. }) | Some(E::SingularPredictor { .. }) => "singular_jacobian",
        Some(E::Overflow { .. }) => "overflow",
        Some(E::NegativeArclength { .. }) => "negative_arclength",
        Some(E::OutOfRange { .. }) => "out_of_range",
        Some(_) => "error",
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
