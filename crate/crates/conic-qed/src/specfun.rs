//! Bessel functions of the first kind `J_nu` for real order, plus the real
//! Gamma function.
//!
//! Every rate formula in this crate reduces to `J` of order `q|m|` or
//! `q|m| ± 1` with `q` real, so a real-order evaluator is the numerical
//! foundation of the whole library. [`bessel_j`] is the fast path;
//! [`bessel_j_oracle`] is a deliberately slow, independent evaluation through
//! the classical integral representation, kept around so the fast path can be
//! cross-checked at any time.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

/// Controls the power-series evaluation inside [`bessel_j`].
#[derive(Debug, Clone)]
pub struct BesselConfig {
    /// Hard cap on ascending-series terms.
    pub series_max_terms: usize,
    /// Arguments at or below this always use the ascending series.
    pub series_arg_threshold: f64,
    /// Absolute term tolerance for series termination.
    pub abs_tol: f64,
    /// Relative term tolerance for series termination.
    pub rel_tol: f64,
}

impl BesselConfig {
    pub fn new(
        series_max_terms: usize,
        series_arg_threshold: f64,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<Self> {
        if series_max_terms < 1 {
            return Err(Error::domain("series_max_terms must be at least 1"));
        }
        if !(series_arg_threshold > 0.0) || !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::domain(
                "series_arg_threshold, abs_tol and rel_tol must be strictly positive",
            ));
        }
        Ok(Self {
            series_max_terms,
            series_arg_threshold,
            abs_tol,
            rel_tol,
        })
    }
}

impl Default for BesselConfig {
    fn default() -> Self {
        Self {
            series_max_terms: 60,
            // alternating-series cancellation grows like I_0(x); 5.0 keeps the
            // series branch at >= 14 significant digits
            series_arg_threshold: 5.0,
            abs_tol: 1e-14,
            rel_tol: 1e-13,
        }
    }
}

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Real Gamma function for positive argument (reflection handles x < 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + 7.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// Natural log of the Gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

fn check_inputs(order: f64, x: f64) -> Result<()> {
    if !order.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!(
            "bessel_j requires finite inputs, got order = {order}, x = {x}"
        )));
    }
    if x < 0.0 {
        return Err(Error::domain(format!(
            "bessel_j requires x >= 0, got x = {x}"
        )));
    }
    Ok(())
}

/// `J_order(x)` for real `order >= 0` (or negative integer order, folded back
/// through `J_{-n} = (-1)^n J_n`) and `x >= 0`.
///
/// Strategy: the ascending power series wherever it is well conditioned, a
/// single normalized downward recurrence (Miller) above that, and the upward
/// three-term recurrence, seeded at the fractional part of the order, for
/// orders below the argument.
pub fn bessel_j(order: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    check_inputs(order, x)?;
    if order < 0.0 {
        if order.fract() != 0.0 {
            return Err(Error::domain(format!(
                "negative non-integer order {order} is outside the reflection rule"
            )));
        }
        let sign = if (-order) as i64 % 2 == 1 { -1.0 } else { 1.0 };
        return Ok(sign * bessel_j(-order, x, cfg)?);
    }
    if x == 0.0 {
        // Exact limits; skips the 0^nu underflow path entirely.
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    // The series is safe when the argument is small, or when the order is
    // large enough that the terms never grow (no cancellation).
    if x <= cfg.series_arg_threshold || x * x <= 8.0 * (order + 1.0) {
        return Ok(ascending_series(order, x, cfg));
    }
    let mu = order.fract();
    if order < x {
        // Upward recurrence is stable for orders below the argument.
        let (j_mu, j_mu1) = miller_normalized(mu, x, &[0, 1]).map(|v| (v[0], v[1]))?;
        let steps = (order - mu).round() as usize;
        Ok(match steps {
            0 => j_mu,
            1 => j_mu1,
            _ => {
                let (mut prev, mut cur) = (j_mu, j_mu1);
                for i in 1..steps {
                    let next = (2.0 * (mu + i as f64) / x) * cur - prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
        })
    } else {
        let n = (order - mu).round() as usize;
        Ok(miller_normalized(mu, x, &[n])?[0])
    }
}

/// Ascending series J_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (-x^2/4)^k / (k! (nu+1)_k).
fn ascending_series(nu: f64, x: f64, cfg: &BesselConfig) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..=cfg.series_max_terms {
        term *= -q / (k as f64 * (nu + k as f64));
        sum += term;
        if term.abs() <= 0.1 * (cfg.abs_tol + cfg.rel_tol * sum.abs()) {
            break;
        }
    }
    // Log-space prefactor; underflows gracefully to zero at very large order.
    let ln_pref = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    sum * ln_pref.exp()
}

/// Exact power-of-two rescale threshold used inside the downward recurrence.
const RESCALE_LIMIT: f64 = 1.0e250;

/// Downward three-term recurrence from above `max(order, x)`, normalized with
/// the Neumann series `(x/2)^mu = sum_k (mu+2k) Gamma(mu+k)/k! J_{mu+2k}(x)`
/// (which degenerates to `1 = J_0 + 2 J_2 + 2 J_4 + ...` at mu = 0).
///
/// `wanted` lists offsets n (ascending) and the return value holds
/// `J_{mu+n}(x)` in the same positions.
fn miller_normalized(mu: f64, x: f64, wanted: &[usize]) -> Result<Vec<f64>> {
    debug_assert!((0.0..1.0).contains(&mu));
    let n_max = *wanted.last().expect("at least one read-out");
    let top = (mu + n_max as f64).max(x) + 15.0 + 2.0 * x.sqrt();
    let n_start = (top - mu).ceil() as usize;

    // c_k = (mu+2k) Gamma(mu+k)/k!, built iteratively from Gamma(mu+1).
    let g1 = gamma(mu + 1.0);
    let k_max = n_start / 2;
    let mut coeff = vec![0.0_f64; k_max + 1];
    coeff[0] = g1;
    let mut g = g1; // Gamma(mu+k)/k!
    for k in 1..=k_max {
        coeff[k] = (mu + 2.0 * k as f64) * g;
        g *= (mu + k as f64) / (k as f64 + 1.0);
    }

    let rescale = 2.0_f64.powi(-500); // exact scaling, no rounding
    let mut out = vec![0.0_f64; wanted.len()];
    let mut jp = 0.0_f64; // J~ at order mu + n + 1
    let mut jc = 1.0e-300_f64; // J~ at order mu + n
    let mut norm = 0.0_f64;
    let mut n = n_start;
    loop {
        if let Ok(pos) = wanted.binary_search(&n) {
            out[pos] = jc;
        }
        if n % 2 == 0 {
            norm += coeff[n / 2] * jc;
        }
        if n == 0 {
            break;
        }
        let jm = (2.0 * (mu + n as f64) / x) * jc - jp;
        jp = jc;
        jc = jm;
        if jc.abs() > RESCALE_LIMIT {
            jc *= rescale;
            jp *= rescale;
            norm *= rescale;
            for v in &mut out {
                *v *= rescale;
            }
        }
        n -= 1;
    }
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::domain(format!(
            "downward recurrence normalization failed at order {}, x = {x}",
            mu + n_max as f64
        )));
    }
    let scale = (0.5 * x).powf(mu) / norm;
    Ok(out.into_iter().map(|v| v * scale).collect())
}

/// Slow reference evaluation through the classical integral representation
///
/// ```text
/// J_nu(x) = (1/pi) Int_0^pi cos(nu t - x sin t) dt
///         - (sin(nu pi)/pi) Int_0^inf exp(-nu t - x sinh t) dt
/// ```
///
/// Fixed high-order Gauss-Legendre on the finite integral; the infinite one is
/// truncated where its integrand drops below 1e-18. Intended for validation,
/// not production use.
pub fn bessel_j_oracle(order: f64, x: f64) -> Result<f64> {
    check_inputs(order, x)?;
    if order < 0.0 {
        if order.fract() != 0.0 {
            return Err(Error::domain(format!(
                "negative non-integer order {order} is outside the reflection rule"
            )));
        }
        let sign = if (-order) as i64 % 2 == 1 { -1.0 } else { 1.0 };
        return Ok(sign * bessel_j_oracle(-order, x)?);
    }
    if x == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    let nu = order;
    let (nodes, weights) = &*quad::legendre_raw(1024);
    let mut finite = 0.0;
    for (&n, &w) in nodes.iter().zip(weights) {
        let t = 0.5 * PI * (n + 1.0);
        finite += w * (nu * t - x * t.sin()).cos();
    }
    finite *= 0.5 * PI / PI;

    if nu.fract() == 0.0 {
        return Ok(finite);
    }
    // Truncate where exp(-nu t - x sinh t) < 1e-18.
    let cutoff = -(1.0e-18_f64).ln();
    let mut t_max = 1.0_f64;
    while nu * t_max + x * t_max.sinh() < cutoff && t_max < 400.0 {
        t_max *= 1.25;
    }
    let (nodes, weights) = &*quad::legendre_raw(512);
    let mut tail = 0.0;
    for (&n, &w) in nodes.iter().zip(weights) {
        let t = 0.5 * t_max * (n + 1.0);
        tail += w * (-nu * t - x * t.sinh()).exp();
    }
    tail *= 0.5 * t_max;
    Ok(finite - (nu * PI).sin() / PI * tail)
}

/// Derivative counterpart of [`bessel_j_oracle`], obtained by differentiating
/// the integral representation under the integral sign. Used by the
/// golden-rule cross-check, which must not rely on the recurrence identity
/// behind [`bessel_j_prime`].
pub(crate) fn bessel_j_prime_oracle(order: f64, x: f64) -> Result<f64> {
    check_inputs(order, x)?;
    if x <= 0.0 {
        return Err(Error::domain("bessel_j_prime_oracle requires x > 0"));
    }
    let nu = order;
    let (nodes, weights) = &*quad::legendre_raw(1024);
    let mut finite = 0.0;
    for (&n, &w) in nodes.iter().zip(weights) {
        let t = 0.5 * PI * (n + 1.0);
        finite += w * t.sin() * (nu * t - x * t.sin()).sin();
    }
    finite *= 0.5 * PI / PI;

    if nu.fract() == 0.0 {
        return Ok(finite);
    }
    let cutoff = -(1.0e-18_f64).ln();
    let mut t_max = 1.0_f64;
    while nu * t_max + x * t_max.sinh() - (1.0 + t_max.sinh()).ln() < cutoff && t_max < 400.0 {
        t_max *= 1.25;
    }
    let (nodes, weights) = &*quad::legendre_raw(512);
    let mut tail = 0.0;
    for (&n, &w) in nodes.iter().zip(weights) {
        let t = 0.5 * t_max * (n + 1.0);
        tail += w * t.sinh() * (-nu * t - x * t.sinh()).exp();
    }
    tail *= 0.5 * t_max;
    Ok(finite + (nu * PI).sin() / PI * tail)
}

/// `d/dx J_order(x)` through the recurrence identity
/// `J'_nu = (J_{nu-1} - J_{nu+1}) / 2`, for x > 0.
pub fn bessel_j_prime(order: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "bessel_j_prime requires x > 0, got x = {x}"
        )));
    }
    let lower = bessel_j(order - 1.0, x, cfg)?;
    let upper = bessel_j(order + 1.0, x, cfg)?;
    Ok(0.5 * (lower - upper))
}
