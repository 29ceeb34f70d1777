use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("inner series must vanish at the origin")]
    NonZeroConstant,
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("window coefficients: expected {expected}, got {got}")]
    WindowLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coefficient blow-up at t = {t}: |c_{index}| = {magnitude}")]
    BlowUp {
        t: f64,
        index: usize,
        magnitude: f64,
    },
    #[error("degenerate map at t = {t}")]
    Degenerate { t: f64 },
    #[error("trajectory carries no momenta")]
    MissingMomenta,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
