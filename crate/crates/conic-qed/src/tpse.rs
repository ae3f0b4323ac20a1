//! Two-photon spontaneous emission: spectral density, enhancement and total
//! rate.
//!
//! The diagonal Green tensor of the conical background reduces the spectral
//! enhancement to weighted products of one-photon Purcell factors evaluated at
//! the two photon frequencies,
//!
//! ```text
//! gamma/gamma_0 = sum_ij (|D_ij|^2 / |D|^2) P_i(omega) P_j(omega_eg - omega)
//! ```
//!
//! with the frequency dependence entering through the Bessel argument
//! `(omega/omega_eg) k_eg rho`. For s -> s transitions the weight collapses to
//! `delta_ij / 3`. Index order throughout: (0, 1, 2) = (rho-hat, phi-hat,
//! z-hat).

use num_complex::Complex64;

use crate::constants::{HBAR, MU_0, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::modes::ComplexVec3;
use crate::opse::{purcell_all, PurcellFactors};
use crate::quad;
use crate::NumericsConfig;

/// One intermediate atomic level with its two dipole matrix elements, both in
/// the cylindrical frame of the string.
#[derive(Debug, Clone)]
pub struct IntermediateLevel {
    /// Frequency of the e -> m transition (same units as `omega_eg`; negative
    /// for levels below the excited state).
    pub omega_em: f64,
    /// Dipole matrix element e -> m.
    pub d_em: ComplexVec3,
    /// Dipole matrix element m -> g.
    pub d_mg: ComplexVec3,
}

/// Level scheme feeding the second-order transition tensor.
#[derive(Debug, Clone)]
pub struct LevelScheme {
    pub omega_eg: f64,
    pub intermediates: Vec<IntermediateLevel>,
}

impl LevelScheme {
    pub fn new(omega_eg: f64, intermediates: Vec<IntermediateLevel>) -> Result<Self> {
        if !(omega_eg > 0.0) || !omega_eg.is_finite() {
            return Err(Error::domain(format!(
                "omega_eg must be positive and finite, got {omega_eg}"
            )));
        }
        if intermediates.is_empty() {
            return Err(Error::domain(
                "a level scheme needs at least one intermediate level",
            ));
        }
        Ok(Self {
            omega_eg,
            intermediates,
        })
    }

    /// Isotropic s -> s scheme: three degenerate intermediates with equal
    /// dipoles along the three axes. Convenient for tests and examples.
    pub fn isotropic(omega_eg: f64, omega_em: f64, dipole: f64) -> Result<Self> {
        let levels = (0..3)
            .map(|axis| {
                let mut d = ComplexVec3::ZERO;
                let c = Complex64::new(dipole, 0.0);
                match axis {
                    0 => d.rho = c,
                    1 => d.phi = c,
                    _ => d.z = c,
                }
                IntermediateLevel {
                    omega_em,
                    d_em: d,
                    d_mg: d,
                }
            })
            .collect();
        Self::new(omega_eg, levels)
    }
}

/// Second-order transition tensor `D_ij(omega, omega')`.
#[derive(Debug, Clone)]
pub struct DTensor {
    entries: [[Complex64; 3]; 3],
    pub omega: f64,
    pub omega_prime: f64,
}

impl DTensor {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    /// `|D|^2 = sum_ij |D_ij|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Builds the transition tensor
/// `D(omega, omega') = sum_m [d_em d_mg / (omega_em - omega) + d_mg d_em / (omega_em - omega')]`.
///
/// Frequencies within `1e-9 omega_eg` of any intermediate level are rejected
/// as resonant.
pub fn d_tensor(scheme: &LevelScheme, omega: f64, omega_prime: f64) -> Result<DTensor> {
    let guard = 1e-9 * scheme.omega_eg;
    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (level, inter) in scheme.intermediates.iter().enumerate() {
        let den1 = inter.omega_em - omega;
        let den2 = inter.omega_em - omega_prime;
        if den1.abs() <= guard || den2.abs() <= guard {
            return Err(Error::Resonance {
                level,
                omega_em: inter.omega_em,
            });
        }
        for (i, row) in entries.iter_mut().enumerate() {
            let em_i = inter.d_em.component(i);
            let mg_i = inter.d_mg.component(i);
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += em_i * inter.d_mg.component(j) / den1
                    + mg_i * inter.d_em.component(j) / den2;
            }
        }
    }
    Ok(DTensor {
        entries,
        omega,
        omega_prime,
    })
}

/// Entry-wise weight matrix `|D_ij|^2 / |D|^2`; the entries sum to one.
pub fn d_isotropy_ratio(d: &DTensor) -> Result<[[f64; 3]; 3]> {
    let norm = d.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::domain("transition tensor is identically zero"));
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = d.entries[i][j].norm_sqr() / norm;
        }
    }
    Ok(out)
}

/// Free-space (Goeppert-Mayer) spectral density in SI units:
/// `gamma_0(omega) = mu_0^2 / (36 pi^3 hbar^2 c^2) omega^3 (omega_eg - omega)^3 |D|^2`.
pub fn gamma0_free(d_norm_sq: f64, omega: f64, omega_eg: f64) -> Result<f64> {
    if !(omega_eg > 0.0) || !omega_eg.is_finite() {
        return Err(Error::domain(format!(
            "omega_eg must be positive, got {omega_eg}"
        )));
    }
    if !(0.0..=omega_eg).contains(&omega) {
        return Err(Error::domain(format!(
            "omega must lie in [0, omega_eg], got {omega}"
        )));
    }
    if !(d_norm_sq >= 0.0) {
        return Err(Error::domain("squared tensor norm must be non-negative"));
    }
    let pi3 = std::f64::consts::PI.powi(3);
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let pref = MU_0 * MU_0 / (36.0 * pi3 * HBAR * HBAR * c2);
    let rest = omega_eg - omega;
    Ok(pref * omega.powi(3) * rest.powi(3) * d_norm_sq)
}

fn check_omega_frac(omega_frac: f64) -> Result<()> {
    if !(omega_frac > 0.0 && omega_frac < 1.0) {
        return Err(Error::domain(format!(
            "omega_frac must lie strictly inside (0, 1), got {omega_frac}"
        )));
    }
    Ok(())
}

/// Purcell-factor pair at the two photon frequencies, shared by both
/// enhancement variants.
fn factor_pair(
    q: f64,
    keg_rho: f64,
    omega_frac: f64,
    cfg: &NumericsConfig,
) -> Result<(PurcellFactors, PurcellFactors)> {
    let x = omega_frac * keg_rho;
    let x_bar = (1.0 - omega_frac) * keg_rho;
    Ok((purcell_all(q, x, cfg)?, purcell_all(q, x_bar, cfg)?))
}

/// Spectral enhancement `gamma/gamma_0` for an s -> s transition:
/// `(1/3) sum_i P_i(omega) P_i(omega_eg - omega)`.
pub fn spectral_enhancement_ss(
    q: f64,
    keg_rho: f64,
    omega_frac: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_omega_frac(omega_frac)?;
    let (a, b) = factor_pair(q, keg_rho, omega_frac, cfg)?;
    Ok((a.p_rho * b.p_rho + a.p_phi * b.p_phi + a.p_z * b.p_z) / 3.0)
}

/// Spectral enhancement for an arbitrary level scheme, weighting the Purcell
/// factor products with `|D_ij|^2 / |D|^2` at `(omega, omega_eg - omega)`.
pub fn spectral_enhancement_general(
    q: f64,
    keg_rho: f64,
    omega_frac: f64,
    scheme: &LevelScheme,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_omega_frac(omega_frac)?;
    let omega = omega_frac * scheme.omega_eg;
    let tensor = d_tensor(scheme, omega, scheme.omega_eg - omega)?;
    let weights = d_isotropy_ratio(&tensor)?;
    let (a, b) = factor_pair(q, keg_rho, omega_frac, cfg)?;
    let pa = [a.p_rho, a.p_phi, a.p_z];
    let pb = [b.p_rho, b.p_phi, b.p_z];
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            total += weights[i][j] * pa[i] * pb[j];
        }
    }
    Ok(total)
}

/// A sampled point of the enhancement spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub omega_frac: f64,
    pub enhancement: f64,
    pub q: f64,
    pub keg_rho: f64,
}

impl SpectralPoint {
    pub fn new(omega_frac: f64, enhancement: f64, q: f64, keg_rho: f64) -> Result<Self> {
        check_omega_frac(omega_frac)?;
        if !(enhancement >= 0.0) {
            return Err(Error::domain(format!(
                "enhancement must be non-negative, got {enhancement}"
            )));
        }
        Ok(Self {
            omega_frac,
            enhancement,
            q,
            keg_rho,
        })
    }
}

/// Ratio of total two-photon rates, `Int gamma d omega / Int gamma_0 d omega`,
/// under the constant-|D| weight `w(f) = f^3 (1-f)^3`.
///
/// The enhancement is symmetric about `f = 1/2`, so the quadrature runs over
/// `(0, 1/2]` only; the doubling cancels between numerator and denominator.
pub fn total_rate_ratio(
    q: f64,
    keg_rho: f64,
    cfg: &NumericsConfig,
    n_omega: usize,
) -> Result<f64> {
    if n_omega < 16 {
        return Err(Error::domain(format!(
            "total-rate quadrature needs n_omega >= 16, got {n_omega}"
        )));
    }
    let raw = quad::legendre_raw(n_omega);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &w) in raw.0.iter().zip(&raw.1) {
        let f = 0.25 * (x + 1.0); // map [-1, 1] -> (0, 1/2)
        let weight = w * f.powi(3) * (1.0 - f).powi(3);
        let enh = spectral_enhancement_ss(q, keg_rho, f, cfg)?;
        num += weight * enh;
        den += weight;
    }
    Ok(num / den)
}
