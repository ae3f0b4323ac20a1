//! Electromagnetic mode functions on the conical background, in natural units
//! (`c = 1`).
//!
//! The z-components solve the two-dimensional Helmholtz equation with the
//! conical angular period `2pi/q`, giving `F_z = J_{q|m|}(k_perp rho)
//! exp(i q m phi)`; the full TM/TE vector potentials follow by applying the
//! transverse gradient. These functions are not on the hot path — they exist
//! so the rate formulas can be tied back to first principles through
//! finite-difference residual checks (Helmholtz equation, Coulomb gauge).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{bessel_j, bessel_j_prime, BesselConfig};

/// Field polarization: TM carries index 0, TE index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Tm,
    Te,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::Tm => 0,
            Polarization::Te => 1,
        }
    }
}

/// Quantum numbers of one mode: transverse and axial wavenumbers, angular
/// index, polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    pub k_perp: f64,
    pub k_z: f64,
    pub m: i32,
    pub polarization: Polarization,
}

impl ModeIndex {
    pub fn new(k_perp: f64, k_z: f64, m: i32, polarization: Polarization) -> Result<Self> {
        if !(k_perp > 0.0) || !k_perp.is_finite() || !k_z.is_finite() {
            return Err(Error::domain(format!(
                "mode requires finite k_perp > 0 and finite k_z, got ({k_perp}, {k_z})"
            )));
        }
        Ok(Self {
            k_perp,
            k_z,
            m,
            polarization,
        })
    }

    /// Mode frequency, `omega = sqrt(k_perp^2 + k_z^2)` with c = 1.
    pub fn omega(&self) -> f64 {
        self.k_perp.hypot(self.k_z)
    }
}

/// Cylindrical position; `phi` is meant to live within one angular period
/// `[0, 2pi/q)`, although the mode functions are exactly periodic anyway.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPosition {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

impl CylPosition {
    pub fn new(rho: f64, phi: f64, z: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() || !phi.is_finite() || !z.is_finite() {
            return Err(Error::domain(format!(
                "position requires finite coordinates with rho >= 0, got ({rho}, {phi}, {z})"
            )));
        }
        Ok(Self { rho, phi, z })
    }
}

/// Complex vector in the cylindrical frame (rho-hat, phi-hat, z-hat).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVec3 {
    pub rho: Complex64,
    pub phi: Complex64,
    pub z: Complex64,
}

impl ComplexVec3 {
    pub const ZERO: ComplexVec3 = ComplexVec3 {
        rho: Complex64::new(0.0, 0.0),
        phi: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub fn new(rho: Complex64, phi: Complex64, z: Complex64) -> Self {
        Self { rho, phi, z }
    }

    /// Component by Green-tensor index order: 0 = rho, 1 = phi, 2 = z.
    pub fn component(&self, i: usize) -> Complex64 {
        match i {
            0 => self.rho,
            1 => self.phi,
            2 => self.z,
            _ => panic!("component index out of range: {i}"),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.rho.norm_sqr() + self.phi.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.rho, self.phi, self.z]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn check_background(q: f64) -> Result<()> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::domain(format!("q must be greater than 1, got {q}")));
    }
    Ok(())
}

/// Squared normalization constant `|beta|^2 = q / (2 pi k_perp)^2` (c = 1),
/// the same for both polarizations.
pub fn normalization_constant(q: f64, k_perp: f64) -> Result<f64> {
    check_background(q)?;
    if !(k_perp > 0.0) || !k_perp.is_finite() {
        return Err(Error::domain(format!(
            "k_perp must be positive and finite, got {k_perp}"
        )));
    }
    let denom = 2.0 * std::f64::consts::PI * k_perp;
    Ok(q / (denom * denom))
}

/// `J'_nu(x)` and `nu J_nu(x)/x` with their exact x -> 0 limits, so the
/// transverse components stay finite on the string axis.
fn radial_pair(nu: f64, x: f64, cfg: &BesselConfig) -> Result<(f64, f64)> {
    if x == 0.0 {
        let prime = if nu == 1.0 {
            0.5
        } else {
            0.0 // J'_nu(0) = 0 for nu = 0 and nu > 1
        };
        let ratio = if nu == 1.0 { 0.5 } else { 0.0 };
        return Ok((prime, nu * ratio));
    }
    let prime = bessel_j_prime(nu, x, cfg)?;
    let over_x = bessel_j(nu, x, cfg)? / x;
    Ok((prime, nu * over_x))
}

/// The TM/TE vector potential mode at a point and time, including the
/// normalization constant:
///
/// ```text
/// A_TM = (beta / i omega) (k_perp^2 z-hat + i k_z grad_perp) [J e^{i theta}]
/// A_TE = -beta z-hat x grad_perp [J e^{i theta}]
/// ```
///
/// where `J = J_{q|m|}(k_perp rho)` and `theta = q m phi + k_z z - omega t`.
pub fn mode_vector_potential(
    mode: &ModeIndex,
    pos: &CylPosition,
    q: f64,
    t: f64,
) -> Result<ComplexVec3> {
    check_background(q)?;
    if !t.is_finite() {
        return Err(Error::domain(format!("time must be finite, got {t}")));
    }
    let cfg = BesselConfig::default();
    let nu = q * mode.m.unsigned_abs() as f64;
    let x = mode.k_perp * pos.rho;
    let omega = mode.omega();
    let qm = q * mode.m as f64;

    let j = bessel_j(nu, x, &cfg)?;
    let (j_prime, nu_j_over_x) = radial_pair(nu, x, &cfg)?;
    // angular derivative (1/rho) d/dphi -> i q m J / rho = i k_perp sign(m) (nu J / x)
    let angular = if mode.m == 0 {
        0.0
    } else {
        mode.k_perp * (mode.m.signum() as f64) * nu_j_over_x
    };

    let theta = qm * pos.phi + mode.k_z * pos.z - omega * t;
    let phase = Complex64::new(theta.cos(), theta.sin());
    let beta = normalization_constant(q, mode.k_perp)?.sqrt();
    let i = Complex64::new(0.0, 1.0);

    Ok(match mode.polarization {
        Polarization::Tm => {
            let scale = beta / omega;
            ComplexVec3::new(
                // (1/i omega) * i k_z * d_rho  ->  (k_z k_perp / omega) J'
                phase * (scale * mode.k_z * mode.k_perp * j_prime),
                // (1/i omega) * i k_z * (i q m / rho) J  ->  i (k_z / omega) angular
                phase * i * (scale * mode.k_z * angular),
                // (1/i omega) k_perp^2 J  ->  -i (k_perp^2 / omega) J
                phase * (-i) * (scale * mode.k_perp * mode.k_perp * j),
            )
        }
        Polarization::Te => ComplexVec3::new(
            // -(z-hat x grad)_rho = +(1/rho) d_phi -> i q m J / rho
            phase * i * (beta * angular),
            // -(z-hat x grad)_phi = -d_rho
            phase * (-beta * mode.k_perp * j_prime),
            Complex64::new(0.0, 0.0),
        ),
    })
}

/// Residual of the two-dimensional Helmholtz equation
/// `(lap_perp + k_perp^2) F_z` at a point, evaluated with second-order
/// central differences on `F_z = J_{q|m|}(k_perp rho) e^{i q m phi}`.
///
/// A correct mode solution keeps this below about `1e-5 k_perp^2 |F_z|`.
pub fn helmholtz_residual(mode: &ModeIndex, pos: &CylPosition, q: f64) -> Result<f64> {
    check_background(q)?;
    let cfg = BesselConfig::default();
    let nu = q * mode.m.unsigned_abs() as f64;
    let qm = q * mode.m as f64;
    let h = 1e-4 / mode.k_perp;
    if pos.rho <= 2.0 * h {
        return Err(Error::domain(format!(
            "finite-difference stencil needs rho > {}, got {}",
            2.0 * h,
            pos.rho
        )));
    }
    let f = |rho: f64, phi: f64| -> Result<Complex64> {
        let j = bessel_j(nu, mode.k_perp * rho, &cfg)?;
        let arg = qm * phi;
        Ok(Complex64::new(arg.cos(), arg.sin()) * j)
    };
    // angular step balances stencil truncation against f64 rounding
    let h_phi = 3e-4 / (1.0 + qm.abs());
    let center = f(pos.rho, pos.phi)?;
    let up = f(pos.rho + h, pos.phi)?;
    let down = f(pos.rho - h, pos.phi)?;
    let left = f(pos.rho, pos.phi - h_phi)?;
    let right = f(pos.rho, pos.phi + h_phi)?;

    let d_rho2 = (up - 2.0 * center + down) / (h * h);
    let d_rho = (up - down) / (2.0 * h);
    let d_phi2 = (right - 2.0 * center + left) / (h_phi * h_phi);
    let lap = d_rho2 + d_rho / pos.rho + d_phi2 / (pos.rho * pos.rho);
    Ok((lap + center * mode.k_perp * mode.k_perp).norm())
}

/// Finite-difference Coulomb-gauge check: magnitude of the cylindrical
/// divergence of the vector potential at a point. Bounded by about
/// `1e-5 omega |A|` for a valid mode.
pub fn divergence_residual(mode: &ModeIndex, pos: &CylPosition, q: f64) -> Result<f64> {
    check_background(q)?;
    let k = mode.omega();
    let h = 1e-5 / k;
    if pos.rho <= 2.0 * h {
        return Err(Error::domain(format!(
            "finite-difference stencil needs rho > {}, got {}",
            2.0 * h,
            pos.rho
        )));
    }
    let h_phi = h / pos.rho;
    let at = |rho: f64, phi: f64, z: f64| -> Result<ComplexVec3> {
        mode_vector_potential(mode, &CylPosition { rho, phi, z }, q, 0.0)
    };
    let rho_up = at(pos.rho + h, pos.phi, pos.z)?;
    let rho_down = at(pos.rho - h, pos.phi, pos.z)?;
    let phi_up = at(pos.rho, pos.phi + h_phi, pos.z)?;
    let phi_down = at(pos.rho, pos.phi - h_phi, pos.z)?;
    let z_up = at(pos.rho, pos.phi, pos.z + h)?;
    let z_down = at(pos.rho, pos.phi, pos.z - h)?;

    // (1/rho) d(rho A_rho)/drho + (1/rho) dA_phi/dphi + dA_z/dz
    let d_rho = ((pos.rho + h) * rho_up.rho - (pos.rho - h) * rho_down.rho) / (2.0 * h * pos.rho);
    let d_phi = (phi_up.phi - phi_down.phi) / (2.0 * h_phi * pos.rho);
    let d_z = (z_up.z - z_down.z) / (2.0 * h);
    Ok((d_rho + d_phi + d_z).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(k_perp: f64, k_z: f64, m: i32, p: Polarization) -> ModeIndex {
        ModeIndex::new(k_perp, k_z, m, p).unwrap()
    }

    fn pos(rho: f64, phi: f64, z: f64) -> CylPosition {
        CylPosition::new(rho, phi, z).unwrap()
    }

    #[test]
    fn te_mode_has_no_axial_component() {
        for m in [-2, 0, 1, 5] {
            let a = mode_vector_potential(
                &mode(1.3, 0.7, m, Polarization::Te),
                &pos(2.0, 0.4, -1.0),
                1.8,
                0.0,
            )
            .unwrap();
            assert_eq!(a.z, Complex64::new(0.0, 0.0), "m = {m}");
        }
    }

    #[test]
    fn tm_axial_component_finite_on_axis() {
        // m = 0: A_z proportional to J_0(0) = 1; transverse parts vanish
        let a = mode_vector_potential(
            &mode(1.0, 0.5, 0, Polarization::Tm),
            &pos(0.0, 0.0, 0.0),
            2.0,
            0.0,
        )
        .unwrap();
        assert!(a.is_finite());
        assert!(a.z.norm() > 0.0);
        assert_eq!(a.rho, Complex64::new(0.0, 0.0));
        assert_eq!(a.phi, Complex64::new(0.0, 0.0));
        // higher m: everything vanishes on the axis when q > 1
        let a = mode_vector_potential(
            &mode(1.0, 0.5, 2, Polarization::Tm),
            &pos(0.0, 0.0, 0.0),
            2.0,
            0.0,
        )
        .unwrap();
        assert!(a.is_finite());
        assert_eq!(a.norm(), 0.0);
    }

    #[test]
    fn tm_matches_finite_difference_gradient() {
        // rebuild A_TM from central differences of the scalar J e^{i theta}
        let q = 2.0;
        let md = mode(1.1, 0.6, 1, Polarization::Tm);
        let p = pos(1.7, 0.3, 0.2);
        let cfg = BesselConfig::default();
        let nu = q * md.m.unsigned_abs() as f64;
        let omega = md.omega();
        let beta = normalization_constant(q, md.k_perp).unwrap().sqrt();
        let scalar = |rho: f64, phi: f64| {
            let j = bessel_j(nu, md.k_perp * rho, &cfg).unwrap();
            let arg = q * md.m as f64 * phi + md.k_z * p.z;
            Complex64::new(arg.cos(), arg.sin()) * j
        };
        let h = 1e-6 * p.rho;
        let d_rho = (scalar(p.rho + h, p.phi) - scalar(p.rho - h, p.phi)) / (2.0 * h);
        let h_phi = 1e-6;
        let d_phi =
            (scalar(p.rho, p.phi + h_phi) - scalar(p.rho, p.phi - h_phi)) / (2.0 * h_phi * p.rho);
        let i = Complex64::new(0.0, 1.0);
        let pref = beta / (i * omega);
        let expect_rho = pref * i * md.k_z * d_rho;
        let expect_phi = pref * i * md.k_z * d_phi;
        let expect_z = pref * md.k_perp * md.k_perp * scalar(p.rho, p.phi);

        let a = mode_vector_potential(&md, &p, q, 0.0).unwrap();
        assert!((a.rho - expect_rho).norm() < 1e-7 * a.norm());
        assert!((a.phi - expect_phi).norm() < 1e-7 * a.norm());
        assert!((a.z - expect_z).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn helmholtz_residual_small_for_solutions() {
        let cases = [
            (1.0, 0, 1.0, 2.0),  // (q, m, k_perp, rho)
            (1.5, 2, 3.0, 1.2),
            (2.5, 1, 0.7, 4.0),
        ];
        for (q, m, k_perp, rho) in cases {
            let md = mode(k_perp, 0.3, m, Polarization::Tm);
            let p = pos(rho, 0.5, 0.0);
            let res = helmholtz_residual(&md, &p, q).unwrap();
            let cfg = BesselConfig::default();
            let f_mag = bessel_j(q * m as f64, k_perp * rho, &cfg).unwrap().abs();
            assert!(
                res <= 1e-5 * k_perp * k_perp * f_mag + 1e-8,
                "q = {q}, m = {m}: residual {res}"
            );
        }
        // the plain J_0 case solves the radial equation to well under 1e-6
        let res = helmholtz_residual(
            &mode(1.0, 0.0, 0, Polarization::Tm),
            &pos(2.0, 0.0, 0.0),
            1.0,
        )
        .unwrap();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn helmholtz_stencil_needs_room() {
        let md = mode(1.0, 0.0, 0, Polarization::Tm);
        assert!(helmholtz_residual(&md, &pos(1e-5, 0.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn gauge_divergence_vanishes() {
        for (q, m, p) in [
            (1.0, 1, Polarization::Tm),
            (1.7, 0, Polarization::Tm),
            (1.7, 2, Polarization::Te),
            (2.3, -1, Polarization::Te),
        ] {
            let md = mode(0.9, 1.2, m, p);
            let x = pos(2.4, 0.2, 0.5);
            let res = divergence_residual(&md, &x, q).unwrap();
            let a = mode_vector_potential(&md, &x, q, 0.0).unwrap();
            assert!(
                res <= 1e-5 * md.omega() * a.norm(),
                "q = {q}, m = {m}, {p:?}: {res}"
            );
        }
    }

    #[test]
    fn angular_period_is_two_pi_over_q() {
        let q = 1.7;
        let md = mode(1.1, -0.4, 3, Polarization::Te);
        let p1 = pos(1.9, 0.7, 0.1);
        let p2 = pos(1.9, 0.7 + 2.0 * PI / q, 0.1);
        let a1 = mode_vector_potential(&md, &p1, q, 0.0).unwrap();
        let a2 = mode_vector_potential(&md, &p2, q, 0.0).unwrap();
        assert!((a1.rho - a2.rho).norm() <= 1e-12 * a1.norm());
        assert!((a1.phi - a2.phi).norm() <= 1e-12 * a1.norm());
    }

    #[test]
    fn free_space_limit_matches_standard_cylindrical_waves() {
        // at q = 1 the modes must reduce to ordinary cylindrical waves built
        // from integer-order Bessel functions
        let cfg = BesselConfig::default();
        let q = 1.0;
        let pts = [
            (1.3, 0.2, 0.0, 1, 0.8, 0.3),
            (2.7, 1.1, -0.4, 2, 1.4, -0.6),
            (0.9, 2.0, 0.3, 0, 0.5, 0.0),
            (3.3, 0.9, 1.2, -3, 1.1, 0.7),
            (1.05, 2.4, -0.8, 4, 0.66, 1.9),
        ];
        for (rho, phi, z, m, k_perp, k_z) in pts {
            let md = mode(k_perp, k_z, m, Polarization::Tm);
            let p = pos(rho, phi, z);
            let a = mode_vector_potential(&md, &p, q, 0.0).unwrap();
            // independent free-space construction
            let n = m.unsigned_abs() as f64;
            let omega = (k_perp * k_perp + k_z * k_z).sqrt();
            let beta = 1.0 / (2.0 * PI * k_perp);
            let arg = m as f64 * phi + k_z * z;
            let phase = Complex64::new(arg.cos(), arg.sin());
            let i = Complex64::new(0.0, 1.0);
            let j = bessel_j(n, k_perp * rho, &cfg).unwrap();
            let jp = bessel_j_prime(n, k_perp * rho, &cfg).unwrap();
            let expect = ComplexVec3::new(
                phase * (beta / omega * k_z * k_perp * jp),
                phase * i * (beta / omega * k_z * (m as f64) * j / rho),
                phase * (-i) * (beta / omega * k_perp * k_perp * j),
            );
            assert!((a.rho - expect.rho).norm() < 1e-8, "rho at m = {m}");
            assert!((a.phi - expect.phi).norm() < 1e-8, "phi at m = {m}");
            assert!((a.z - expect.z).norm() < 1e-8, "z at m = {m}");
        }
    }

    #[test]
    fn normalization_constant_scalings() {
        let base = normalization_constant(1.0, 2.0).unwrap();
        assert!((base - 1.0 / (4.0 * PI * 2.0 * PI * 2.0)).abs() < 1e-15);
        assert_eq!(normalization_constant(2.0, 2.0).unwrap(), 2.0 * base);
        let quarter = normalization_constant(1.0, 4.0).unwrap();
        assert!((quarter - 0.25 * base).abs() < 1e-18);
        assert!(normalization_constant(0.5, 1.0).is_err());
        assert!(normalization_constant(1.5, 0.0).is_err());
    }
}
