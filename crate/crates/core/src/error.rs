use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid arguments or parameters supplied by the caller.
    Input,
    /// Malformed, missing or inconsistent data files.
    Data,
    /// A numerical procedure failed or its result is not meaningful.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("levels {lower} and {upper} are degenerate within {gap:e} GHz")]
    Degenerate { lower: usize, upper: usize, gap: f64 },

    #[error("no interior minimum of f01 in [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("temperature trace never crosses T_c = {t_c} K downward")]
    NoCrossing { t_c: f64 },

    #[error("timeline ends at {temperature} K, not below T_c = {t_c} K")]
    EndsNormal { temperature: f64, t_c: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("under-determined fit: {points} data points for {parameters} parameters")]
    Underdetermined { points: usize, parameters: usize },

    #[error("ill-conditioned Jacobian (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("model outside its domain of validity: {0}")]
    OutOfDomain(String),

    #[error("fit stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unit mismatch in '{field}': expected {expected}, found '{found}'")]
    UnitMismatch {
        field: String,
        expected: String,
        found: String,
    },

    #[error("header mismatch: expected {expected}, found '{found}'")]
    HeaderMismatch { expected: String, found: String },

    #[error("non-numeric cell '{value}' at row {row}, column '{column}'")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::IndexOutOfRange(_) => ErrorKind::Input,
            Error::NoCrossing { .. }
            | Error::EndsNormal { .. }
            | Error::EmptyInput(_)
            | Error::Underdetermined { .. }
            | Error::Io { .. }
            | Error::Schema(_)
            | Error::UnitMismatch { .. }
            | Error::HeaderMismatch { .. }
            | Error::NonNumeric { .. } => ErrorKind::Data,
            Error::Stage { source, .. } => source.kind(),
            Error::NonConvergence { .. }
            | Error::Degenerate { .. }
            | Error::NoInteriorMinimum { .. }
            | Error::IllConditioned { .. }
            | Error::Unidentifiable(_)
            | Error::OutOfDomain(_) => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
