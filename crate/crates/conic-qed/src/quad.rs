//! Weighted quadrature and symmetric series truncation.
//!
//! The rate integrals all carry the endpoint weight `1/sqrt(1-u^2)` on
//! `u in [0, 1]`. Substituting `u = sin(theta)` turns them into smooth
//! integrals over `[0, pi/2]`, which plain Gauss-Legendre handles well; the
//! angular sums over `m` run symmetrically and are truncated once consecutive
//! terms fall below a relative tolerance.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// Gauss-Legendre rule mapped onto `theta in (0, pi/2)`.
///
/// [`integrate_weighted`] evaluates `Int_0^1 f(u)/sqrt(1-u^2) du` as
/// `sum_i w_i f(sin theta_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Raw Gauss-Legendre nodes/weights on [-1, 1], cached per count.
pub(crate) fn legendre_raw(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: Lazy<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    let mut cache = CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| Arc::new(legendre_nodes_weights(n)))
        .clone()
}

/// Nodes and weights by Newton iteration on the Legendre recurrence.
fn legendre_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess for the i-th root of P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_{n-1} by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `node_count` nodes on `(0, pi/2)`.
    pub fn gauss_legendre(node_count: usize) -> Result<Self> {
        if node_count < 1 {
            return Err(Error::domain("node_count must be at least 1"));
        }
        let raw = legendre_raw(node_count);
        let nodes: Vec<f64> = raw.0.iter().map(|x| 0.25 * PI * (x + 1.0)).collect();
        let weights: Vec<f64> = raw.1.iter().map(|w| 0.25 * PI * w).collect();
        debug_assert!(nodes.windows(2).all(|p| p[0] < p[1]));
        debug_assert!((weights.iter().sum::<f64>() - FRAC_PI_2).abs() < 1e-12);
        Ok(Self { nodes, weights })
    }

    /// Shared, cached rule; identical contents regardless of which thread
    /// builds it first.
    pub fn cached(node_count: usize) -> Result<Arc<Self>> {
        static CACHE: Lazy<Mutex<HashMap<usize, Arc<QuadratureRule>>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        if node_count < 1 {
            return Err(Error::domain("node_count must be at least 1"));
        }
        let mut cache = CACHE.lock().unwrap();
        Ok(cache
            .entry(node_count)
            .or_insert_with(|| Arc::new(Self::gauss_legendre(node_count).expect("validated")))
            .clone())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Theta nodes, strictly increasing inside `(0, pi/2)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `Int_0^1 f(u)/sqrt(1-u^2) du` by the sine substitution.
pub fn integrate_weighted<F: Fn(f64) -> f64>(f: F, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let u = theta.sin();
        let v = f(u);
        if !v.is_finite() {
            return Err(Error::Evaluation { node: u, value: v });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Three-component variant sharing one pass over the nodes, so the
/// orientation-resolved rates can reuse each Bessel evaluation.
pub(crate) fn integrate_weighted3<F: Fn(f64) -> (f64, f64, f64)>(
    f: F,
    rule: &QuadratureRule,
) -> Result<(f64, f64, f64)> {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let u = theta.sin();
        let (va, vb, vc) = f(u);
        if !va.is_finite() || !vb.is_finite() || !vc.is_finite() {
            let bad = [va, vb, vc].into_iter().find(|v| !v.is_finite()).unwrap();
            return Err(Error::Evaluation {
                node: u,
                value: bad,
            });
        }
        a += w * va;
        b += w * vb;
        c += w * vc;
    }
    Ok((a, b, c))
}

/// Truncation control for the symmetric angular sums.
#[derive(Debug, Clone)]
pub struct TruncationPolicy {
    /// A term below `rel_tol * |partial sum|` counts as small.
    pub rel_tol: f64,
    /// Stop once this many consecutive terms are small.
    pub consecutive_small: usize,
    /// Hard cap on the index m.
    pub m_max: usize,
}

impl TruncationPolicy {
    pub fn new(rel_tol: f64, consecutive_small: usize, m_max: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be strictly positive"));
        }
        if consecutive_small < 2 || m_max < consecutive_small {
            return Err(Error::domain(
                "need m_max >= consecutive_small >= 2",
            ));
        }
        Ok(Self {
            rel_tol,
            consecutive_small,
            m_max,
        })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            consecutive_small: 3,
            m_max: 2000,
        }
    }
}

/// Outcome of a truncated symmetric sum.
#[derive(Debug, Clone)]
pub struct SumReport {
    /// `term(0) + 2 sum_{m>=1} term(m)` up to the stopping index.
    pub value: f64,
    /// Number of distinct m values evaluated.
    pub terms_used: usize,
    /// False when the hard cap was reached before the tolerance.
    pub converged: bool,
    /// Magnitude of the last evaluated term.
    pub last_term_magnitude: f64,
}

/// Sums `term` over all integers m, exploiting `term(m) = term(-m)`.
///
/// Stops after `consecutive_small` successive terms each fall below
/// `rel_tol * |partial sum|`; reports `converged = false` when `m_max` is
/// reached first.
pub fn sum_symmetric_m<F: FnMut(usize) -> Result<f64>>(
    mut term: F,
    policy: &TruncationPolicy,
) -> Result<SumReport> {
    let t0 = term(0)?;
    if !t0.is_finite() {
        return Err(Error::Evaluation {
            node: 0.0,
            value: t0,
        });
    }
    let mut value = t0;
    let mut last = t0.abs();
    let mut small_run = if t0.abs() <= policy.rel_tol * value.abs() {
        1
    } else {
        0
    };
    let mut terms_used = 1;
    let mut converged = small_run >= policy.consecutive_small;
    for m in 1..=policy.m_max {
        let t = term(m)?;
        if !t.is_finite() {
            return Err(Error::Evaluation {
                node: m as f64,
                value: t,
            });
        }
        value += 2.0 * t;
        last = t.abs();
        terms_used += 1;
        if last <= policy.rel_tol * value.abs() {
            small_run += 1;
            if small_run >= policy.consecutive_small {
                converged = true;
                break;
            }
        } else {
            small_run = 0;
        }
    }
    Ok(SumReport {
        value,
        terms_used,
        converged,
        last_term_magnitude: last,
    })
}
