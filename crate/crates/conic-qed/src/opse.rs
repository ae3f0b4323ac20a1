//! One-photon spontaneous-emission rates near the string.
//!
//! The normalized rate for a dipole along direction `n` is an angular sum of
//! weighted Bessel integrals,
//!
//! ```text
//! G_z   = (3q/2) sum_m Int u^3/sqrt(1-u^2) J_{q|m|}^2(k x u) du
//! G_rho = (3q/8) sum_m Int u/sqrt(1-u^2) [(2-u^2)(J_{q|m|-1}^2 + J_{q|m|+1}^2)
//!                                          + 2u^2 J_{q|m|-1} J_{q|m|+1}] du
//! G_phi =  same with the cross term negated
//! ```
//!
//! with `k x = k_eg rho` the dimensionless emitter-string distance. The m = 0
//! term needs `J_{-1} = -J_1`. All three integrands share the same Bessel
//! evaluations, so the batched entry point computes them together.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::constants::{EPSILON_0, GRAVITATIONAL, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureRule, SumReport};
use crate::specfun::{bessel_j, ln_gamma, BesselConfig};
use crate::NumericsConfig;

/// Direction of the emitter's transition dipole moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Parallel to the string.
    Z,
    /// Radial, pointing away from the string.
    Rho,
    /// Tangential, perpendicular to both.
    Phi,
    /// Orientation-averaged: (G_z + G_rho + G_phi)/3.
    Isotropic,
}

impl Orientation {
    pub const ALL_SINGLE: [Orientation; 3] = [Orientation::Rho, Orientation::Phi, Orientation::Z];

    pub fn label(self) -> &'static str {
        match self {
            Orientation::Z => "z",
            Orientation::Rho => "rho",
            Orientation::Phi => "phi",
            Orientation::Isotropic => "iso",
        }
    }
}

/// The conical background: deficit parameter `q = 2pi/phi_0 >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringBackground {
    q: f64,
}

impl StringBackground {
    pub fn new(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q })
    }

    /// Background from the linear mass density in kg/m.
    pub fn from_mass_density(mu: f64) -> Result<Self> {
        Ok(Self { q: q_from_mu(mu)? })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Linear mass density in kg/m.
    pub fn mass_density(&self) -> f64 {
        mu_from_q(self.q).expect("q validated on construction")
    }
}

/// The three orientation-resolved Purcell factors and their average at one
/// `(q, k_eg rho)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellFactors {
    pub p_z: f64,
    pub p_rho: f64,
    pub p_phi: f64,
    pub p_iso: f64,
    pub keg_rho: f64,
    pub q: f64,
}

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::domain(format!("q must be >= 1, got {q}")));
    }
    Ok(())
}

fn check_distance(keg_rho: f64) -> Result<()> {
    if !keg_rho.is_finite() || keg_rho < 0.0 {
        return Err(Error::domain(format!(
            "keg_rho must be finite and non-negative, got {keg_rho}"
        )));
    }
    Ok(())
}

/// Per-m integrals of the three orientation integrands, computed lazily and
/// cached so every orientation reuses the same Bessel evaluations.
struct TermTable<'a> {
    q: f64,
    keg_rho: f64,
    rule: Arc<QuadratureRule>,
    bessel: &'a BesselConfig,
    cache: RefCell<Vec<(f64, f64, f64)>>,
}

impl<'a> TermTable<'a> {
    fn new(q: f64, keg_rho: f64, cfg: &'a NumericsConfig) -> Result<Self> {
        Ok(Self {
            q,
            keg_rho,
            rule: QuadratureRule::cached(cfg.quad_nodes)?,
            bessel: &cfg.bessel,
            cache: RefCell::new(Vec::new()),
        })
    }

    fn term(&self, m: usize) -> Result<(f64, f64, f64)> {
        let have = self.cache.borrow().len();
        for idx in have..=m {
            let t = self.compute(idx)?;
            self.cache.borrow_mut().push(t);
        }
        Ok(self.cache.borrow()[m])
    }

    fn compute(&self, m: usize) -> Result<(f64, f64, f64)> {
        let nu = self.q * m as f64;
        let stashed: RefCell<Option<Error>> = RefCell::new(None);
        let result = quad::integrate_weighted3(
            |u| {
                let x = self.keg_rho * u;
                let evaluated = (|| -> Result<(f64, f64, f64)> {
                    let jz = bessel_j(nu, x, self.bessel)?;
                    let jm = bessel_j(nu - 1.0, x, self.bessel)?;
                    let jp = bessel_j(nu + 1.0, x, self.bessel)?;
                    let squares = (2.0 - u * u) * (jm * jm + jp * jp);
                    let cross = 2.0 * u * u * jm * jp;
                    Ok((
                        u * u * u * jz * jz,
                        u * (squares + cross),
                        u * (squares - cross),
                    ))
                })();
                match evaluated {
                    Ok(t) => t,
                    Err(e) => {
                        *stashed.borrow_mut() = Some(e);
                        (f64::NAN, f64::NAN, f64::NAN)
                    }
                }
            },
            &self.rule,
        );
        if let Some(e) = stashed.into_inner() {
            return Err(e);
        }
        result
    }
}

fn orientation_sum(
    table: &TermTable,
    orient: Orientation,
    cfg: &NumericsConfig,
) -> Result<SumReport> {
    let prefactor = match orient {
        Orientation::Z => 1.5 * table.q,
        Orientation::Rho | Orientation::Phi => 0.375 * table.q,
        Orientation::Isotropic => unreachable!("handled by the batched path"),
    };
    let report = quad::sum_symmetric_m(
        |m| {
            let (tz, tr, tp) = table.term(m)?;
            Ok(prefactor
                * match orient {
                    Orientation::Z => tz,
                    Orientation::Rho => tr,
                    Orientation::Phi => tp,
                    Orientation::Isotropic => unreachable!(),
                })
        },
        &cfg.truncation,
    )?;
    if !report.converged {
        return Err(Error::Convergence {
            context: format!(
                "purcell {} at q = {}, keg_rho = {}",
                orient.label(),
                table.q,
                table.keg_rho
            ),
            report,
        });
    }
    Ok(report)
}

/// Exact rates at the string position: only the parallel orientation couples
/// for q > 1, while q = 1 is isotropic free space.
fn factors_at_origin(q: f64) -> PurcellFactors {
    let transverse = if q == 1.0 { 1.0 } else { 0.0 };
    PurcellFactors {
        p_z: q,
        p_rho: transverse,
        p_phi: transverse,
        p_iso: (q + transverse + transverse) / 3.0,
        keg_rho: 0.0,
        q,
    }
}

/// Normalized OPSE rate `Gamma_orient / Gamma_0` at deficit parameter `q` and
/// dimensionless distance `keg_rho`.
pub fn purcell_factor(
    orient: Orientation,
    q: f64,
    keg_rho: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_q(q)?;
    check_distance(keg_rho)?;
    if keg_rho == 0.0 {
        let f = factors_at_origin(q);
        return Ok(match orient {
            Orientation::Z => f.p_z,
            Orientation::Rho => f.p_rho,
            Orientation::Phi => f.p_phi,
            Orientation::Isotropic => f.p_iso,
        });
    }
    if orient == Orientation::Isotropic {
        return Ok(purcell_all(q, keg_rho, cfg)?.p_iso);
    }
    let table = TermTable::new(q, keg_rho, cfg)?;
    Ok(orientation_sum(&table, orient, cfg)?.value)
}

/// All three orientations plus the isotropic average, sharing the Bessel
/// evaluations across orientations. Matches [`purcell_factor`] bit for bit.
pub fn purcell_all(q: f64, keg_rho: f64, cfg: &NumericsConfig) -> Result<PurcellFactors> {
    check_q(q)?;
    check_distance(keg_rho)?;
    if keg_rho == 0.0 {
        return Ok(factors_at_origin(q));
    }
    let table = TermTable::new(q, keg_rho, cfg)?;
    let p_z = orientation_sum(&table, Orientation::Z, cfg)?.value;
    let p_rho = orientation_sum(&table, Orientation::Rho, cfg)?.value;
    let p_phi = orientation_sum(&table, Orientation::Phi, cfg)?.value;
    Ok(PurcellFactors {
        p_z,
        p_rho,
        p_phi,
        p_iso: (p_z + p_rho + p_phi) / 3.0,
        keg_rho,
        q,
    })
}

/// Closed-form truncated expansion of the rates for `keg_rho << 1`, q > 1.
///
/// ```text
/// G_z   ~ q [1 - (2/5) r^2 + 3(q+1) r^{2q} / ((q+3/2) Gamma(2q+2))]
/// G_rho ~ q [r^2/20 + (3/4)(q+1) r^{2(q-1)} / ((q+1/2) Gamma(2q))]
/// G_phi ~ q [r^2/4  + (3/4)(q+1) r^{2(q-1)} / ((q+1/2) Gamma(2q))]
/// ```
///
/// with `r = keg_rho`.
pub fn small_rho_asymptotic(orient: Orientation, q: f64, keg_rho: f64) -> Result<f64> {
    if !q.is_finite() || q <= 1.0 {
        return Err(Error::domain(format!(
            "small-distance expansion requires q > 1, got {q}"
        )));
    }
    check_distance(keg_rho)?;
    let r = keg_rho;
    // r^p / Gamma(a) in log space; exact zero at r = 0 since p > 0 throughout
    let power_term = |p: f64, ln_coeff: f64| -> f64 {
        if r == 0.0 {
            0.0
        } else {
            (p * r.ln() + ln_coeff).exp()
        }
    };
    let z_tail = power_term(
        2.0 * q,
        (3.0 * (q + 1.0) / (q + 1.5)).ln() - ln_gamma(2.0 * q + 2.0),
    );
    let transverse_tail = power_term(
        2.0 * (q - 1.0),
        (0.75 * (q + 1.0) / (q + 0.5)).ln() - ln_gamma(2.0 * q),
    );
    let g_z = q * (1.0 - 0.4 * r * r + z_tail);
    let g_rho = q * (r * r / 20.0 + transverse_tail);
    let g_phi = q * (r * r / 4.0 + transverse_tail);
    Ok(match orient {
        Orientation::Z => g_z,
        Orientation::Rho => g_rho,
        Orientation::Phi => g_phi,
        Orientation::Isotropic => (g_z + g_rho + g_phi) / 3.0,
    })
}

/// The m = 0 term alone, which dominates once `q` is a few units above
/// `keg_rho`. Linear in q by construction.
pub fn large_q_approx(
    orient: Orientation,
    q: f64,
    keg_rho: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_q(q)?;
    check_distance(keg_rho)?;
    let rule = QuadratureRule::cached(cfg.quad_nodes)?;
    let stashed: RefCell<Option<Error>> = RefCell::new(None);
    let guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            *stashed.borrow_mut() = Some(e);
            f64::NAN
        }
    };
    let integral = |o: Orientation| -> Result<f64> {
        let v = quad::integrate_weighted(
            |u| {
                let x = keg_rho * u;
                match o {
                    Orientation::Z => {
                        let j0 = guard(bessel_j(0.0, x, &cfg.bessel));
                        u * u * u * j0 * j0
                    }
                    Orientation::Rho => {
                        let j1 = guard(bessel_j(1.0, x, &cfg.bessel));
                        u * (1.0 - u * u) * j1 * j1
                    }
                    Orientation::Phi => {
                        let j1 = guard(bessel_j(1.0, x, &cfg.bessel));
                        u * j1 * j1
                    }
                    Orientation::Isotropic => unreachable!(),
                }
            },
            &rule,
        );
        if let Some(e) = stashed.borrow_mut().take() {
            return Err(e);
        }
        v
    };
    Ok(match orient {
        Orientation::Isotropic => {
            let z = 1.5 * q * integral(Orientation::Z)?;
            let r = 1.5 * q * integral(Orientation::Rho)?;
            let p = 1.5 * q * integral(Orientation::Phi)?;
            (z + r + p) / 3.0
        }
        o => 1.5 * q * integral(o)?,
    })
}

/// Dimensionful free-space OPSE rate in 1/s:
/// `Gamma_0 = |d_eg|^2 omega_eg^3 / (3 pi eps_0 hbar c^3)`.
pub fn free_space_rate(dipole_sq: f64, omega_eg: f64) -> Result<f64> {
    if !dipole_sq.is_finite() || dipole_sq < 0.0 {
        return Err(Error::domain(format!(
            "squared dipole moment must be non-negative, got {dipole_sq}"
        )));
    }
    if !omega_eg.is_finite() || omega_eg <= 0.0 {
        return Err(Error::domain(format!(
            "transition frequency must be positive, got {omega_eg}"
        )));
    }
    let c3 = SPEED_OF_LIGHT * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    Ok(dipole_sq * omega_eg * omega_eg * omega_eg / (3.0 * PI * EPSILON_0 * HBAR * c3))
}

/// Critical linear mass density `c^2/(4G)` above which the deficit closes the
/// cone into a different topology.
pub fn critical_mass_density() -> f64 {
    SPEED_OF_LIGHT * SPEED_OF_LIGHT / (4.0 * GRAVITATIONAL)
}

/// Deficit parameter from the linear mass density (kg/m):
/// `q = 2pi / (2pi - 8 pi G mu / c^2)`.
pub fn q_from_mu(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!(
            "mass density must be non-negative, got {mu}"
        )));
    }
    if mu >= critical_mass_density() {
        return Err(Error::domain(format!(
            "mass density {mu} kg/m at or above c^2/4G would close the cone"
        )));
    }
    let deficit = 8.0 * PI * GRAVITATIONAL * mu / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    Ok(2.0 * PI / (2.0 * PI - deficit))
}

/// Linear mass density (kg/m) from the deficit parameter.
pub fn mu_from_q(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(critical_mass_density() * (1.0 - 1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn free_space_is_normalized() {
        // q = 1 must recover the free-space rate for any distance
        let p = purcell_factor(Orientation::Rho, 1.0, 3.7, &cfg()).unwrap();
        assert!((p - 1.0).abs() < 1e-8, "{p}");
    }

    #[test]
    fn parallel_rate_doubles_at_contact_for_q_two() {
        let p = purcell_factor(Orientation::Z, 2.0, 1e-6, &cfg()).unwrap();
        assert!((p - 2.0).abs() < 1e-4, "{p}");
    }

    #[test]
    fn radial_rate_vanishes_at_contact() {
        let p = purcell_factor(Orientation::Rho, 1.5, 0.0, &cfg()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn generic_point_matches_golden_rule_reference() {
        // frozen from the pre-reduction golden-rule cross-check
        let p = purcell_factor(Orientation::Z, 1.5, 2.0, &cfg()).unwrap();
        assert!((p - 0.857_581_160_348).abs() < 1e-9, "{p}");
        let r = purcell_factor(Orientation::Rho, 1.5, 2.0, &cfg()).unwrap();
        assert!((r - 1.003_207_142_676).abs() < 1e-9, "{r}");
        let f = purcell_factor(Orientation::Phi, 1.5, 2.0, &cfg()).unwrap();
        assert!((f - 1.161_896_323_911).abs() < 1e-9, "{f}");
    }

    #[test]
    fn batched_factors_at_origin() {
        let f = purcell_all(2.5, 0.0, &cfg()).unwrap();
        assert_eq!(f.p_z, 2.5);
        assert_eq!(f.p_rho, 0.0);
        assert_eq!(f.p_phi, 0.0);
        assert_eq!(f.p_iso, 2.5 / 3.0);
    }

    #[test]
    fn batched_free_space_is_unit() {
        let f = purcell_all(1.0, 5.0, &cfg()).unwrap();
        for v in [f.p_z, f.p_rho, f.p_phi, f.p_iso] {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn batched_matches_individual_bit_for_bit() {
        let n = cfg();
        let f = purcell_all(1.5, 10.0, &n).unwrap();
        assert_eq!(f.p_z, purcell_factor(Orientation::Z, 1.5, 10.0, &n).unwrap());
        assert_eq!(
            f.p_rho,
            purcell_factor(Orientation::Rho, 1.5, 10.0, &n).unwrap()
        );
        assert_eq!(
            f.p_phi,
            purcell_factor(Orientation::Phi, 1.5, 10.0, &n).unwrap()
        );
        assert_eq!(f.p_iso, (f.p_z + f.p_rho + f.p_phi) / 3.0);
    }

    #[test]
    fn small_rho_expansion_limits() {
        assert_eq!(
            small_rho_asymptotic(Orientation::Z, 2.0, 0.0).unwrap(),
            2.0
        );
        assert_eq!(
            small_rho_asymptotic(Orientation::Phi, 1.5, 0.0).unwrap(),
            0.0
        );
        assert!(small_rho_asymptotic(Orientation::Z, 1.0, 0.1).is_err());
    }

    #[test]
    fn small_rho_expansion_tracks_full_rate() {
        let n = cfg();
        for orient in [Orientation::Z, Orientation::Rho, Orientation::Phi] {
            for q in [1.5, 2.5] {
                let full = purcell_factor(orient, q, 0.05, &n).unwrap();
                let approx = small_rho_asymptotic(orient, q, 0.05).unwrap();
                assert!(
                    (full - approx).abs() / q <= 0.01,
                    "{orient:?} q = {q}: {full} vs {approx}"
                );
            }
        }
    }

    #[test]
    fn large_q_limit_is_exactly_linear() {
        let n = cfg();
        for orient in [Orientation::Z, Orientation::Rho, Orientation::Phi] {
            let v1 = large_q_approx(orient, 7.0, 2.0, &n).unwrap();
            let v2 = large_q_approx(orient, 14.0, 2.0, &n).unwrap();
            assert_eq!(v2, 2.0 * v1, "{orient:?}");
        }
    }

    #[test]
    fn large_q_limit_matches_full_sum() {
        let n = cfg();
        for orient in [Orientation::Z, Orientation::Rho, Orientation::Phi] {
            let full = purcell_factor(orient, 20.0, 2.0, &n).unwrap();
            let approx = large_q_approx(orient, 20.0, 2.0, &n).unwrap();
            assert!(
                ((full - approx) / full).abs() <= 1e-6,
                "{orient:?}: {full} vs {approx}"
            );
        }
    }

    #[test]
    fn unconverged_sum_is_surfaced() {
        let mut n = cfg();
        n.truncation.m_max = 3;
        let err = purcell_factor(Orientation::Z, 1.5, 25.0, &n).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }), "{err:?}");
    }

    #[test]
    fn domain_checks() {
        let n = cfg();
        assert!(purcell_factor(Orientation::Z, 0.9, 1.0, &n).is_err());
        assert!(purcell_factor(Orientation::Z, 1.5, -1.0, &n).is_err());
        assert!(purcell_factor(Orientation::Z, f64::NAN, 1.0, &n).is_err());
    }

    #[test]
    fn hydrogen_scale_free_space_rate() {
        // 2p -> 1s: d = 0.7449 e a0, omega = 10.2 eV / hbar
        let e = 1.602_176_634e-19;
        let a0 = 5.291_772_109_03e-11;
        let d_sq = (0.7449 * e * a0) * (0.7449 * e * a0);
        let omega = 10.2 * e / HBAR;
        let rate = free_space_rate(d_sq, omega).unwrap();
        assert!(
            (rate - 6.259_852_34e8).abs() / 6.26e8 < 1e-6,
            "rate = {rate}"
        );
    }

    #[test]
    fn rate_scales_with_frequency_cubed() {
        let base = free_space_rate(1e-58, 1.0e15).unwrap();
        let doubled = free_space_rate(1e-58, 2.0e15).unwrap();
        assert_eq!(doubled, 8.0 * base);
        assert_eq!(free_space_rate(0.0, 1.0e15).unwrap(), 0.0);
        assert!(free_space_rate(-1.0, 1.0e15).is_err());
        assert!(free_space_rate(1e-58, 0.0).is_err());
    }

    #[test]
    fn mass_density_round_trip() {
        assert_eq!(q_from_mu(0.0).unwrap(), 1.0);
        // mu = c^2/8G gives a deficit of pi, i.e. q = 2
        let mu_half = 0.5 * critical_mass_density();
        assert!((q_from_mu(mu_half).unwrap() - 2.0).abs() < 1e-14);
        let q = 1.5;
        let back = q_from_mu(mu_from_q(q).unwrap()).unwrap();
        assert!(((back - q) / q).abs() < 1e-12);
        assert!(q_from_mu(critical_mass_density()).is_err());
        assert!(mu_from_q(0.5).is_err());
    }

    #[test]
    fn background_type_round_trips() {
        let bg = StringBackground::new(2.0).unwrap();
        let from_mu = StringBackground::from_mass_density(bg.mass_density()).unwrap();
        assert!((from_mu.q() - 2.0).abs() < 1e-12);
        assert!(StringBackground::new(0.0).is_err());
    }
}
