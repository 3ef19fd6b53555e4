use thiserror::Error;

/// Errors raised by model construction, integration and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("revision protocol produced a negative switch rate {rate:e} at ({from}, {to})")]
    Protocol { from: usize, to: usize, rate: f64 },

    #[error("integration blew up at t = {time}: {reason}")]
    Blowup { time: f64, reason: String },

    #[error("non-finite state at t = {time}")]
    Numerical { time: f64 },

    #[error("storage undefined{}: {reason}", at_time(*.time))]
    Domain { time: Option<f64>, reason: String },

    #[error("structurally inapplicable: {0}")]
    Structural(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("frequency grid point omega = {omega} lies within {distance:e} of an imaginary-axis pole")]
    Grid { omega: f64, distance: f64 },

    #[error("ill-posed interconnection: {0}")]
    IllPosed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

fn at_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn dim(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
