use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Residual failures in identity sweeps are never errors; they are reported
/// through [`crate::identities::IdentityReport`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the Gamma function at {0}")]
    Pole(i64),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("order {0} outside the supported envelope |w| <= {1}")]
    OrderOutOfRange(f64, f64),

    #[error("connection formula degenerate at order {0} (|sin(pi nu)| < 1e-3); use bessel_k")]
    ConnectionDegenerate(String),

    #[error("degenerate sine: |sin(2 pi z)| = {0:e} is below the threshold {1:e}")]
    DegenerateSine(f64, f64),

    #[error("strip mismatch: real part {re} requires n = {required}, got n = {given}")]
    StripMismatch { re: f64, required: i64, given: u32 },

    #[error("parameters outside the validated envelope: {0}")]
    Range(String),

    #[error("integrand evaluation failed at x = {0}")]
    EvaluationFailure(f64),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid quadrature spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Pole(_) => "pole",
            Error::Overflow(_) => "overflow",
            Error::OrderOutOfRange(..) => "order_out_of_range",
            Error::ConnectionDegenerate(_) => "connection_degenerate",
            Error::DegenerateSine(..) => "degenerate_sine",
            Error::StripMismatch { .. } => "strip_mismatch",
            Error::Range(_) => "range",
            Error::EvaluationFailure(_) => "evaluation_failure",
            Error::Grid(_) => "grid",
            Error::Spec(_) => "spec",
        }
    }
}
