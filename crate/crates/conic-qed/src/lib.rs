//! Spontaneous emission of a dipole emitter near an idealized cosmic string.
//!
//! The string background is flat spacetime with a conical deficit, fully
//! described by one dimensionless parameter `q >= 1` (`q = 1` is free space).
//! This crate evaluates the normalized one-photon emission rates (Purcell
//! factors) for the three dipole orientations, the two-photon spectral
//! enhancement built from them, and the supporting special functions,
//! quadrature and electromagnetic mode machinery.
//!
//! Internally everything dimensionless uses natural units (`c = 1`); the only
//! dimensionful operations are the explicit SI rate formulas in [`opse`] and
//! [`tpse`].

pub mod constants;
pub mod error;
pub mod modes;
pub mod opse;
pub mod quad;
pub mod selftest;
pub mod specfun;
pub mod tpse;

pub use error::{Error, Result};
pub use opse::{Orientation, PurcellFactors, StringBackground};
pub use quad::{QuadratureRule, SumReport, TruncationPolicy};
pub use specfun::BesselConfig;

/// Numerical knobs shared by every series/integral evaluation.
#[derive(Debug, Clone)]
pub struct NumericsConfig {
    /// Gauss-Legendre node count for the u-integrals.
    pub quad_nodes: usize,
    /// Truncation policy for the angular m-sums.
    pub truncation: TruncationPolicy,
    /// Bessel series control.
    pub bessel: BesselConfig,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            quad_nodes: 128,
            truncation: TruncationPolicy::default(),
            bessel: BesselConfig::default(),
        }
    }
}

impl NumericsConfig {
    pub fn new(
        quad_nodes: usize,
        truncation: TruncationPolicy,
        bessel: BesselConfig,
    ) -> Result<Self> {
        if quad_nodes < 1 {
            return Err(Error::domain("quad_nodes must be at least 1"));
        }
        Ok(Self {
            quad_nodes,
            truncation,
            bessel,
        })
    }
}
