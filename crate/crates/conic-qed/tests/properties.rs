//! Property tests for the exact identities the library promises.

use conic_qed::opse::{self, purcell_all, Orientation};
use conic_qed::quad::{sum_symmetric_m, TruncationPolicy};
use conic_qed::specfun::{bessel_j, BesselConfig};
use conic_qed::tpse;
use conic_qed::NumericsConfig;

use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_rule_is_exact(n in 0i32..20, x in 0.0f64..40.0) {
        let cfg = BesselConfig::default();
        let plus = bessel_j(n as f64, x, &cfg).unwrap();
        let minus = bessel_j(-n as f64, x, &cfg).unwrap();
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert_eq!(minus, sign * plus);
    }

    #[test]
    fn symmetric_sum_equals_paired_two_sided_sum(scale in 0.05f64..0.9, phase in 0.0f64..3.0) {
        let term = |m: usize| scale.powi(m as i32) * ((m as f64) + phase).cos();
        let policy = TruncationPolicy::new(1e-13, 3, 500).unwrap();
        let report = sum_symmetric_m(|m| Ok(term(m)), &policy).unwrap();
        let m_top = report.terms_used - 1;
        let mut direct = term(0);
        for m in 1..=m_top {
            direct += term(m) + term(m);
        }
        prop_assert_eq!(report.value, direct);
    }

    #[test]
    fn mass_density_round_trip(q in 1.0f64..50.0) {
        let mu = opse::mu_from_q(q).unwrap();
        let back = opse::q_from_mu(mu).unwrap();
        prop_assert!(((back - q) / q).abs() < 1e-12);
    }

    #[test]
    fn isotropic_average_is_exact(q in 1.0f64..3.0, kr in 0.0f64..6.0) {
        let cfg = NumericsConfig::default();
        let f = purcell_all(q, kr, &cfg).unwrap();
        prop_assert_eq!(f.p_iso, (f.p_z + f.p_rho + f.p_phi) / 3.0);
        prop_assert!(f.p_z >= 0.0 && f.p_rho >= 0.0 && f.p_phi >= 0.0);
    }

    #[test]
    fn d_tensor_swap_transpose(omega in 0.05f64..0.45, d_re in -1.0f64..1.0, d_im in -1.0f64..1.0) {
        let scheme = tpse::LevelScheme::new(
            1.0,
            vec![tpse::IntermediateLevel {
                omega_em: 2.0,
                d_em: conic_qed::modes::ComplexVec3::new(
                    Complex64::new(d_re, d_im),
                    Complex64::new(0.4, -0.2),
                    Complex64::new(-0.7, 0.1),
                ),
                d_mg: conic_qed::modes::ComplexVec3::new(
                    Complex64::new(0.2, 0.9),
                    Complex64::new(d_im, d_re),
                    Complex64::new(0.3, 0.0),
                ),
            }],
        )
        .unwrap();
        let a = tpse::d_tensor(&scheme, omega, 1.0 - omega).unwrap();
        let b = tpse::d_tensor(&scheme, 1.0 - omega, omega).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(a.entry(i, j), b.entry(j, i));
            }
        }
    }

    #[test]
    fn isotropy_ratio_normalized(omega in 0.05f64..0.45) {
        let scheme = tpse::LevelScheme::isotropic(1.0, 1.7, 0.9).unwrap();
        let t = tpse::d_tensor(&scheme, omega, 1.0 - omega).unwrap();
        let w = tpse::d_isotropy_ratio(&t).unwrap();
        let total: f64 = w.iter().flatten().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enhancement_exchange_symmetric(q in 1.0f64..3.0, kr in 0.1f64..5.0, f in 0.05f64..0.5) {
        let cfg = NumericsConfig::default();
        let a = tpse::spectral_enhancement_ss(q, kr, f, &cfg).unwrap();
        let b = tpse::spectral_enhancement_ss(q, kr, 1.0 - f, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn purcell_positive_over_acceptance_grid() {
    let cfg = NumericsConfig::default();
    for &q in &[1.0, 1.5, 2.0, 2.5, 3.0] {
        for i in 0..=20 {
            let kr = i as f64;
            let f = purcell_all(q, kr, &cfg).unwrap();
            for (orient, v) in [("z", f.p_z), ("rho", f.p_rho), ("phi", f.p_phi)] {
                assert!(v >= 0.0, "negative rate at q={q}, kr={kr}, {orient}");
            }
        }
    }
}

#[test]
fn large_distance_envelope() {
    // oscillatory approach to free space: |P - 1| <= C / keg_rho with C <= 5
    let cfg = NumericsConfig::default();
    for &q in &[1.5, 2.0, 3.0] {
        for &kr in &[20.0, 25.0, 30.0] {
            let f = purcell_all(q, kr, &cfg).unwrap();
            for orient in Orientation::ALL_SINGLE {
                let v = match orient {
                    Orientation::Z => f.p_z,
                    Orientation::Rho => f.p_rho,
                    Orientation::Phi => f.p_phi,
                    Orientation::Isotropic => unreachable!(),
                };
                assert!(
                    (v - 1.0).abs() <= 5.0 / kr,
                    "envelope violated at q={q}, kr={kr}, {orient:?}: {v}"
                );
            }
        }
    }
}
