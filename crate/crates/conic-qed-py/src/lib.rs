//! Python bindings: the main types and operations of the rate library,
//! importable as `conic_qed`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use conic_qed::opse::{self, Orientation};
use conic_qed::specfun::{self, BesselConfig};
use conic_qed::tpse;
use conic_qed::{selftest, NumericsConfig, TruncationPolicy};

fn to_py_err(e: conic_qed::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_orientation(s: &str) -> PyResult<Orientation> {
    match s {
        "z" => Ok(Orientation::Z),
        "rho" => Ok(Orientation::Rho),
        "phi" => Ok(Orientation::Phi),
        "iso" => Ok(Orientation::Isotropic),
        other => Err(PyValueError::new_err(format!(
            "orientation must be one of 'z', 'rho', 'phi', 'iso', got '{other}'"
        ))),
    }
}

fn build_numerics(
    nodes: Option<usize>,
    m_max: Option<usize>,
    rel_tol: Option<f64>,
) -> PyResult<NumericsConfig> {
    let truncation = TruncationPolicy::new(rel_tol.unwrap_or(1e-10), 3, m_max.unwrap_or(2000))
        .map_err(to_py_err)?;
    NumericsConfig::new(nodes.unwrap_or(128), truncation, BesselConfig::default())
        .map_err(to_py_err)
}

/// Orientation-resolved Purcell factors at one (q, keg_rho) point.
#[pyclass(name = "PurcellFactors", frozen)]
struct PyPurcellFactors {
    #[pyo3(get)]
    p_z: f64,
    #[pyo3(get)]
    p_rho: f64,
    #[pyo3(get)]
    p_phi: f64,
    #[pyo3(get)]
    p_iso: f64,
    #[pyo3(get)]
    q: f64,
    #[pyo3(get)]
    keg_rho: f64,
}

#[pymethods]
impl PyPurcellFactors {
    fn __repr__(&self) -> String {
        format!(
            "PurcellFactors(q={}, keg_rho={}, p_z={}, p_rho={}, p_phi={}, p_iso={})",
            self.q, self.keg_rho, self.p_z, self.p_rho, self.p_phi, self.p_iso
        )
    }
}

/// Bessel function of the first kind for real order >= 0 (negative integer
/// orders fold back through the reflection rule).
#[pyfunction]
fn bessel_j(order: f64, x: f64) -> PyResult<f64> {
    specfun::bessel_j(order, x, &BesselConfig::default()).map_err(to_py_err)
}

/// Slow integral-representation evaluation of the same function, for
/// cross-checks.
#[pyfunction]
fn bessel_j_oracle(order: f64, x: f64) -> PyResult<f64> {
    specfun::bessel_j_oracle(order, x).map_err(to_py_err)
}

/// Normalized OPSE rate for one dipole orientation ('z', 'rho', 'phi', 'iso').
#[pyfunction]
#[pyo3(signature = (orientation, q, keg_rho, nodes=None, m_max=None, rel_tol=None))]
fn purcell_factor(
    orientation: &str,
    q: f64,
    keg_rho: f64,
    nodes: Option<usize>,
    m_max: Option<usize>,
    rel_tol: Option<f64>,
) -> PyResult<f64> {
    let cfg = build_numerics(nodes, m_max, rel_tol)?;
    opse::purcell_factor(parse_orientation(orientation)?, q, keg_rho, &cfg).map_err(to_py_err)
}

/// All three orientations plus the isotropic average in one call.
#[pyfunction]
#[pyo3(signature = (q, keg_rho, nodes=None, m_max=None, rel_tol=None))]
fn purcell_all(
    q: f64,
    keg_rho: f64,
    nodes: Option<usize>,
    m_max: Option<usize>,
    rel_tol: Option<f64>,
) -> PyResult<PyPurcellFactors> {
    let cfg = build_numerics(nodes, m_max, rel_tol)?;
    let f = opse::purcell_all(q, keg_rho, &cfg).map_err(to_py_err)?;
    Ok(PyPurcellFactors {
        p_z: f.p_z,
        p_rho: f.p_rho,
        p_phi: f.p_phi,
        p_iso: f.p_iso,
        q: f.q,
        keg_rho: f.keg_rho,
    })
}

/// Closed-form small-distance expansion of the rates (q > 1).
#[pyfunction]
fn small_rho_asymptotic(orientation: &str, q: f64, keg_rho: f64) -> PyResult<f64> {
    opse::small_rho_asymptotic(parse_orientation(orientation)?, q, keg_rho).map_err(to_py_err)
}

/// m = 0 approximation of the rates, valid once q is a few units above keg_rho.
#[pyfunction]
#[pyo3(signature = (orientation, q, keg_rho, nodes=None))]
fn large_q_approx(
    orientation: &str,
    q: f64,
    keg_rho: f64,
    nodes: Option<usize>,
) -> PyResult<f64> {
    let cfg = build_numerics(nodes, None, None)?;
    opse::large_q_approx(parse_orientation(orientation)?, q, keg_rho, &cfg).map_err(to_py_err)
}

/// Two-photon spectral enhancement gamma/gamma_0 for an s -> s transition.
#[pyfunction]
#[pyo3(signature = (q, keg_rho, omega_frac, nodes=None, m_max=None, rel_tol=None))]
fn spectral_enhancement(
    q: f64,
    keg_rho: f64,
    omega_frac: f64,
    nodes: Option<usize>,
    m_max: Option<usize>,
    rel_tol: Option<f64>,
) -> PyResult<f64> {
    let cfg = build_numerics(nodes, m_max, rel_tol)?;
    tpse::spectral_enhancement_ss(q, keg_rho, omega_frac, &cfg).map_err(to_py_err)
}

/// Ratio of total two-photon rates under the constant-|D| spectral weight.
#[pyfunction]
#[pyo3(signature = (q, keg_rho, n_omega=32, nodes=None, m_max=None, rel_tol=None))]
fn total_rate_ratio(
    q: f64,
    keg_rho: f64,
    n_omega: usize,
    nodes: Option<usize>,
    m_max: Option<usize>,
    rel_tol: Option<f64>,
) -> PyResult<f64> {
    let cfg = build_numerics(nodes, m_max, rel_tol)?;
    tpse::total_rate_ratio(q, keg_rho, &cfg, n_omega).map_err(to_py_err)
}

/// Dimensionful free-space one-photon rate in 1/s (SI inputs).
#[pyfunction]
fn free_space_rate(dipole_sq: f64, omega_eg: f64) -> PyResult<f64> {
    opse::free_space_rate(dipole_sq, omega_eg).map_err(to_py_err)
}

/// Deficit parameter from the string's linear mass density in kg/m.
#[pyfunction]
fn q_from_mu(mu: f64) -> PyResult<f64> {
    opse::q_from_mu(mu).map_err(to_py_err)
}

/// Linear mass density in kg/m from the deficit parameter.
#[pyfunction]
fn mu_from_q(q: f64) -> PyResult<f64> {
    opse::mu_from_q(q).map_err(to_py_err)
}

/// Runs the invariant suite; returns a list of (name, passed, detail).
#[pyfunction]
#[pyo3(signature = (quick=true))]
fn run_selftest(quick: bool) -> Vec<(String, bool, String)> {
    selftest::run(quick)
        .into_iter()
        .map(|o| (o.name.to_string(), o.passed, o.detail))
        .collect()
}

#[pymodule(name = "conic_qed")]
fn conic_qed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPurcellFactors>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(purcell_factor, m)?)?;
    m.add_function(wrap_pyfunction!(purcell_all, m)?)?;
    m.add_function(wrap_pyfunction!(small_rho_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(large_q_approx, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_enhancement, m)?)?;
    m.add_function(wrap_pyfunction!(total_rate_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(free_space_rate, m)?)?;
    m.add_function(wrap_pyfunction!(q_from_mu, m)?)?;
    m.add_function(wrap_pyfunction!(mu_from_q, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
