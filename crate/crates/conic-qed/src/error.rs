use thiserror::Error;

use crate::quad::SumReport;

/// Errors produced by the special-function, quadrature and rate evaluations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrand returned a non-finite value at a quadrature node.
    #[error("integrand evaluated to {value} at node u = {node}")]
    Evaluation { node: f64, value: f64 },

    /// An angular-index sum hit its hard cap before meeting the tolerance.
    #[error(
        "m-sum failed to converge ({context}): {terms} terms, last |term| = {last:e}",
        terms = report.terms_used,
        last = report.last_term_magnitude
    )]
    Convergence { context: String, report: SumReport },

    /// A two-photon denominator came within the pole guard of an intermediate level.
    #[error("photon frequency resonant with intermediate level {level} (omega_em = {omega_em})")]
    Resonance { level: usize, omega_em: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
