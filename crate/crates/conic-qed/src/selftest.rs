//! Built-in invariant suite.
//!
//! Every analytic identity and cross-check the library is supposed to satisfy
//! is runnable at any time, from the CLI (`conic-qed selftest`) or from test
//! code. The oracle comparisons are slow and can be skipped with `quick`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::opse::{
    large_q_approx, purcell_all, purcell_factor, small_rho_asymptotic, Orientation,
};
use crate::quad::{self, QuadratureRule, TruncationPolicy};
use crate::specfun::{bessel_j, bessel_j_oracle, bessel_j_prime_oracle, BesselConfig};
use crate::tpse::{spectral_enhancement_general, spectral_enhancement_ss, LevelScheme};
use crate::{modes, NumericsConfig};

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: false,
            detail: detail.into(),
        }
    }

    fn from_bound(name: &'static str, worst: f64, bound: f64) -> Self {
        if worst <= bound {
            Self::pass(name, format!("worst {worst:.3e} <= {bound:.1e}"))
        } else {
            Self::fail(name, format!("worst {worst:.3e} exceeds {bound:.1e}"))
        }
    }
}

/// Runs the whole suite with default numerics.
pub fn run(quick: bool) -> Vec<CheckOutcome> {
    run_with(&NumericsConfig::default(), quick)
}

/// Runs the whole suite with explicit numerics; `quick` skips the slow
/// oracle comparisons while keeping every analytic identity.
pub fn run_with(cfg: &NumericsConfig, quick: bool) -> Vec<CheckOutcome> {
    let mut out = vec![
        bessel_reflection(cfg),
        bessel_sum_identity(cfg),
        bessel_cross_identity(cfg),
        bessel_large_order_decay(cfg),
        free_space_recovery(cfg),
        selection_rule(cfg),
        inverted_parabola(cfg),
        small_rho_agreement(cfg),
        large_q_collapse(cfg),
        far_field_envelope(cfg),
        tpse_exchange_symmetry(cfg),
        tpse_free_space(cfg),
        tpse_plateau(cfg),
        tpse_q_squared(cfg),
        tpse_composition(cfg),
        tpse_general_isotropic(cfg),
        modes_helmholtz(),
        modes_gauge_divergence(),
        modes_angular_period(),
    ];
    if !quick {
        out.push(bessel_oracle_agreement(cfg));
        out.push(opse_direct_oracle(cfg));
        out.push(quad_refinement(cfg));
    }
    out
}

fn guard(name: &'static str, r: Result<CheckOutcome>) -> CheckOutcome {
    r.unwrap_or_else(|e| CheckOutcome::fail(name, format!("error: {e}")))
}

fn bessel_reflection(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "bessel-reflection";
    guard(NAME, (|| {
        for n in 0..=10_i32 {
            for &x in &[0.3, 2.0, 9.5, 24.0] {
                let plus = bessel_j(n as f64, x, &cfg.bessel)?;
                let minus = bessel_j(-n as f64, x, &cfg.bessel)?;
                let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                if minus != sign * plus {
                    return Ok(CheckOutcome::fail(
                        NAME,
                        format!("J_-{n}({x}) != (-1)^{n} J_{n}({x})"),
                    ));
                }
            }
        }
        Ok(CheckOutcome::pass(NAME, "exact on the whole grid"))
    })())
}

fn bessel_sum_identity(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "bessel-sum-identity";
    guard(NAME, (|| {
        let policy = TruncationPolicy::default();
        let mut worst = 0.0_f64;
        for &x in &[0.5, 5.0, 17.0, 30.0] {
            let report = quad::sum_symmetric_m(
                |m| {
                    let j = bessel_j(m as f64, x, &cfg.bessel)?;
                    Ok(j * j)
                },
                &policy,
            )?;
            worst = worst.max((report.value - 1.0).abs());
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-10))
    })())
}

fn bessel_cross_identity(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "bessel-cross-identity";
    guard(NAME, (|| {
        let policy = TruncationPolicy::default();
        let mut worst = 0.0_f64;
        for &x in &[0.5, 5.0, 17.0, 30.0] {
            let report = quad::sum_symmetric_m(
                |m| {
                    let mf = m as f64;
                    Ok(bessel_j(mf + 1.0, x, &cfg.bessel)?
                        * bessel_j(mf - 1.0, x, &cfg.bessel)?)
                },
                &policy,
            )?;
            worst = worst.max(report.value.abs());
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-10))
    })())
}

fn bessel_large_order_decay(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "bessel-large-order-decay";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        let mut nu = 10.0;
        while nu <= 50.0 {
            let mut x = 0.5;
            while x <= nu / 2.0 {
                let j = bessel_j(nu, x, &cfg.bessel)?;
                let bound = (nu * (1.0 + (x / (2.0 * nu)).ln())).exp() / (2.0 * PI * nu).sqrt();
                worst = worst.max(j.abs() / bound);
                x += 0.9;
            }
            nu += 2.3;
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1.01))
    })())
}

fn free_space_recovery(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "free-space-recovery";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &kr in &[0.1, 1.0, 5.0, 20.0] {
            let f = purcell_all(1.0, kr, cfg)?;
            for v in [f.p_z, f.p_rho, f.p_phi, f.p_iso] {
                worst = worst.max((v - 1.0).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-8))
    })())
}

fn selection_rule(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "selection-rule";
    guard(NAME, (|| {
        for &q in &[1.5, 2.0, 2.5, 3.0] {
            let f = purcell_all(q, 1e-6, cfg)?;
            if (f.p_z - q).abs() > 1e-4 {
                return Ok(CheckOutcome::fail(NAME, format!("p_z({q}) = {}", f.p_z)));
            }
            if f.p_rho >= 1e-6 || f.p_phi >= 1e-6 {
                return Ok(CheckOutcome::fail(
                    NAME,
                    format!("transverse rates at q = {q}: {} {}", f.p_rho, f.p_phi),
                ));
            }
        }
        Ok(CheckOutcome::pass(NAME, "z -> q, transverse -> 0 at contact"))
    })())
}

fn inverted_parabola(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "inverted-parabola";
    guard(NAME, (|| {
        for &q in &[1.5, 2.0, 3.0] {
            let mut prev = f64::INFINITY;
            for i in 1..=6 {
                let kr = 0.05 * i as f64;
                let p = purcell_factor(Orientation::Z, q, kr, cfg)?;
                if p >= prev {
                    return Ok(CheckOutcome::fail(
                        NAME,
                        format!("p_z not decreasing at q = {q}, kr = {kr}"),
                    ));
                }
                prev = p;
                if kr <= 0.1 {
                    let parabola = q * (1.0 - 0.4 * kr * kr);
                    if ((p - parabola) / parabola).abs() > 0.01 {
                        return Ok(CheckOutcome::fail(
                            NAME,
                            format!("parabola mismatch at q = {q}, kr = {kr}"),
                        ));
                    }
                }
            }
        }
        Ok(CheckOutcome::pass(NAME, "decreasing and parabolic near contact"))
    })())
}

fn small_rho_agreement(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "small-rho-asymptotics";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for orient in Orientation::ALL_SINGLE {
            for &q in &[1.5, 2.5] {
                for &kr in &[0.01, 0.05] {
                    let full = purcell_factor(orient, q, kr, cfg)?;
                    let approx = small_rho_asymptotic(orient, q, kr)?;
                    worst = worst.max((full - approx).abs() / q);
                }
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 0.01))
    })())
}

fn large_q_collapse(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "large-q-collapse";
    guard(NAME, (|| {
        let grid = [
            (6.0, 1.0),
            (10.0, 2.0),
            (12.0, 5.0),
            (15.0, 8.0),
            (20.0, 2.0),
            (30.0, 20.0),
        ];
        let mut worst = 0.0_f64;
        for orient in Orientation::ALL_SINGLE {
            for &(q, kr) in &grid {
                let full = purcell_factor(orient, q, kr, cfg)?;
                let approx = large_q_approx(orient, q, kr, cfg)?;
                worst = worst.max(((full - approx) / full).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-4))
    })())
}

fn far_field_envelope(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "far-field-envelope";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &q in &[1.5, 2.0, 3.0] {
            for &kr in &[20.0, 25.0, 30.0] {
                let f = purcell_all(q, kr, cfg)?;
                for v in [f.p_z, f.p_rho, f.p_phi] {
                    worst = worst.max((v - 1.0).abs() * kr);
                }
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 5.0))
    })())
}

fn tpse_exchange_symmetry(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-exchange-symmetry";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &q in &[1.5, 2.5] {
            for &kr in &[2.0, 4.0] {
                for &f in &[0.17, 0.3, 0.41] {
                    let a = spectral_enhancement_ss(q, kr, f, cfg)?;
                    let b = spectral_enhancement_ss(q, kr, 1.0 - f, cfg)?;
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-12))
    })())
}

fn tpse_free_space(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-free-space";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &f in &[0.1, 0.5, 0.83] {
            for &kr in &[0.5, 2.0, 10.0] {
                let e = spectral_enhancement_ss(1.0, kr, f, cfg)?;
                worst = worst.max((e - 1.0).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-8))
    })())
}

fn tpse_plateau(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-small-distance-plateau";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &q in &[1.5, 2.5] {
            let target = q * q / 3.0;
            for &f in &[0.1, 0.35, 0.5, 0.9] {
                let e = spectral_enhancement_ss(q, 1e-4, f, cfg)?;
                worst = worst.max((e - target).abs() / target);
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-3))
    })())
}

fn tpse_q_squared(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-q-squared-growth";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &q in &[20.0, 40.0] {
            let low = spectral_enhancement_ss(q, 1.0, 0.5, cfg)?;
            let high = spectral_enhancement_ss(2.0 * q, 1.0, 0.5, cfg)?;
            worst = worst.max((high / low - 4.0).abs() / 4.0);
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 0.02))
    })())
}

fn tpse_composition(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-composition";
    guard(NAME, (|| {
        let e = spectral_enhancement_ss(1.5, 2.0, 0.5, cfg)?;
        let p = purcell_all(1.5, 1.0, cfg)?;
        let expect = (p.p_rho * p.p_rho + p.p_phi * p.p_phi + p.p_z * p.p_z) / 3.0;
        if e == expect {
            Ok(CheckOutcome::pass(NAME, "degenerate case is an exact square"))
        } else {
            Ok(CheckOutcome::fail(NAME, format!("{e} != {expect}")))
        }
    })())
}

fn tpse_general_isotropic(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "tpse-general-vs-ss";
    guard(NAME, (|| {
        let scheme = LevelScheme::isotropic(1.0, 2.0, 0.7)?;
        let mut worst = 0.0_f64;
        for &f in &[0.2, 0.5, 0.66] {
            let gen = spectral_enhancement_general(2.0, 3.0, f, &scheme, cfg)?;
            let ss = spectral_enhancement_ss(2.0, 3.0, f, cfg)?;
            worst = worst.max((gen - ss).abs());
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-12))
    })())
}

/// Deterministic (mode, point) samples for the mode-function checks.
fn mode_samples() -> Vec<(f64, modes::ModeIndex, modes::CylPosition)> {
    let qs = [1.0, 1.3, 1.7, 2.1, 2.8];
    let ks = [0.6, 1.1, 2.3, 0.9];
    let kzs = [0.0, 0.8, -1.4];
    let ms = [0, 1, -2, 3];
    let rhos = [0.8, 1.9, 3.4];
    let mut out = Vec::new();
    let mut i = 0usize;
    while out.len() < 20 {
        let q = qs[i % qs.len()];
        let k_perp = ks[(i / 2) % ks.len()];
        let k_z = kzs[(i / 3) % kzs.len()];
        let m = ms[(i / 5) % ms.len()];
        let rho = rhos[(i / 7) % rhos.len()];
        let pol = if i % 2 == 0 {
            modes::Polarization::Tm
        } else {
            modes::Polarization::Te
        };
        let mode = modes::ModeIndex::new(k_perp, k_z, m, pol).expect("valid sample");
        let pos = modes::CylPosition::new(rho, 0.31 + 0.11 * i as f64, 0.2).expect("valid sample");
        out.push((q, mode, pos));
        i += 1;
    }
    out
}

fn modes_helmholtz() -> CheckOutcome {
    const NAME: &str = "modes-helmholtz";
    guard(NAME, (|| {
        let bessel = BesselConfig::default();
        for (q, mode, pos) in mode_samples() {
            let res = modes::helmholtz_residual(&mode, &pos, q)?;
            let f_mag = bessel_j(
                q * mode.m.unsigned_abs() as f64,
                mode.k_perp * pos.rho,
                &bessel,
            )?
            .abs();
            let bound = 1e-5 * mode.k_perp * mode.k_perp * f_mag + 1e-8;
            if res > bound {
                return Ok(CheckOutcome::fail(
                    NAME,
                    format!("residual {res:.3e} > {bound:.3e} at q = {q}, m = {}", mode.m),
                ));
            }
        }
        Ok(CheckOutcome::pass(NAME, "20 samples within threshold"))
    })())
}

fn modes_gauge_divergence() -> CheckOutcome {
    const NAME: &str = "modes-gauge-divergence";
    guard(NAME, (|| {
        for (q, mode, pos) in mode_samples() {
            let res = modes::divergence_residual(&mode, &pos, q)?;
            let a = modes::mode_vector_potential(&mode, &pos, q, 0.0)?;
            let bound = 1e-5 * mode.omega() * a.norm();
            if res > bound {
                return Ok(CheckOutcome::fail(
                    NAME,
                    format!("divergence {res:.3e} > {bound:.3e} at q = {q}, m = {}", mode.m),
                ));
            }
        }
        Ok(CheckOutcome::pass(NAME, "20 samples within threshold"))
    })())
}

fn modes_angular_period() -> CheckOutcome {
    const NAME: &str = "modes-angular-period";
    guard(NAME, (|| {
        for (q, mode, pos) in mode_samples() {
            let shifted =
                modes::CylPosition::new(pos.rho, pos.phi + 2.0 * PI / q, pos.z)?;
            let a = modes::mode_vector_potential(&mode, &pos, q, 0.0)?;
            let b = modes::mode_vector_potential(&mode, &shifted, q, 0.0)?;
            let diff = ((a.rho - b.rho).norm_sqr()
                + (a.phi - b.phi).norm_sqr()
                + (a.z - b.z).norm_sqr())
            .sqrt();
            if diff > 1e-12 * a.norm() {
                return Ok(CheckOutcome::fail(
                    NAME,
                    format!("period violation {diff:.3e} at q = {q}, m = {}", mode.m),
                ));
            }
        }
        Ok(CheckOutcome::pass(NAME, "A(phi) = A(phi + 2pi/q)"))
    })())
}

fn bessel_oracle_agreement(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "bessel-oracle-agreement";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for i in 0..=25 {
            for j in 0..=25 {
                let nu = 2.0 * i as f64;
                let x = 2.0 * j as f64;
                let fast = bessel_j(nu, x, &cfg.bessel)?;
                let slow = bessel_j_oracle(nu, x)?;
                worst = worst.max((fast - slow).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-10))
    })())
}

fn opse_direct_oracle(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "opse-direct-oracle";
    guard(NAME, (|| {
        let mut worst = 0.0_f64;
        for &(q, kr) in &[(1.5, 2.0), (2.5, 4.0)] {
            for orient in Orientation::ALL_SINGLE {
                let reduced = purcell_factor(orient, q, kr, cfg)?;
                let direct = direct_rate_oracle(orient, q, kr)?;
                worst = worst.max((reduced - direct).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-6))
    })())
}

fn quad_refinement(cfg: &NumericsConfig) -> CheckOutcome {
    const NAME: &str = "quad-refinement";
    guard(NAME, (|| {
        let coarse = QuadratureRule::gauss_legendre(128)?;
        let fine = QuadratureRule::gauss_legendre(256)?;
        let mut worst = 0.0_f64;
        for &kr in &[2.0, 10.0, 30.0] {
            for &nu in &[0.0_f64, 1.5, 3.0] {
                let f = |u: f64| {
                    let j = bessel_j(nu, kr * u, &cfg.bessel).unwrap_or(f64::NAN);
                    u * u * u * j * j
                };
                let a = quad::integrate_weighted(f, &coarse)?;
                let b = quad::integrate_weighted(f, &fine)?;
                worst = worst.max((a - b).abs());
            }
        }
        Ok(CheckOutcome::from_bound(NAME, worst, 1e-11))
    })())
}

/// Golden-rule rate assembled directly from the mode functions, before any of
/// the reductions the fast path relies on.
///
/// Works in natural units with `omega_eg = 1`: the mode amplitudes come from
/// the raw TM/TE component formulas (through the slow integral-representation
/// Bessel evaluations, not the recurrence identities), the frequency delta is
/// expanded over the two axial roots, and the remaining transverse integral is
/// done on its own 512-node rule. Agreement with [`purcell_factor`] validates
/// the polarization contractions and the delta expansion at once.
pub fn direct_rate_oracle(orient: Orientation, q: f64, keg_rho: f64) -> Result<f64> {
    let rule = QuadratureRule::cached(512)?;
    let four_pi_sq = 4.0 * PI * PI;
    let mut total = 0.0_f64;
    let mut small_run = 0;
    for m in 0..=200_usize {
        let nu = q * m as f64;
        let mut integral = 0.0_f64;
        for (&theta, &w) in rule.nodes().iter().zip(rule.weights()) {
            // k_perp = sin(theta) in units of k_eg; k_z = cos(theta) from the
            // delta; the 1/k_z of the delta expansion cancels the Jacobian.
            let k_perp = theta.sin();
            let k_z = theta.cos();
            let x = k_perp * keg_rho;
            let j = bessel_j_oracle(nu, x)?;
            let amp2 = match orient {
                Orientation::Z => q * k_perp * k_perp * j * j / four_pi_sq,
                Orientation::Rho => {
                    let jp = bessel_j_prime_oracle(nu, x)?;
                    let tm = q * k_z * k_z * jp * jp / four_pi_sq;
                    let te = if m == 0 {
                        0.0
                    } else {
                        let mf = m as f64;
                        q * q * q * mf * mf * j * j
                            / (four_pi_sq * k_perp * k_perp * keg_rho * keg_rho)
                    };
                    tm + te
                }
                Orientation::Phi => {
                    let jp = bessel_j_prime_oracle(nu, x)?;
                    let te = q * jp * jp / four_pi_sq;
                    let tm = if m == 0 {
                        0.0
                    } else {
                        let mf = m as f64;
                        q * q * q * mf * mf * k_z * k_z * j * j
                            / (four_pi_sq * k_perp * k_perp * keg_rho * keg_rho)
                    };
                    tm + te
                }
                Orientation::Isotropic => unreachable!("oracle works per orientation"),
            };
            integral += w * k_perp * 2.0 * amp2;
        }
        let term = PI * integral * if m == 0 { 1.0 } else { 2.0 };
        total += term;
        if nu > keg_rho + 5.0 && term.abs() < 1e-14 * total.abs().max(1e-300) {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    // normalize by the free-space rate 1/(3 pi) in these units
    Ok(total * 3.0 * PI)
}
