//! Grid evaluation and CSV rendering for the sweep commands.
//!
//! Every command produces a deterministic CSV: `#`-prefixed header comments
//! recording the sweep and numerics parameters, one header row, then one row
//! per grid point with 17-significant-digit floats. Grid points are evaluated
//! in a worker pool but assembled in index order, so parallelism never changes
//! the bytes.

use std::fmt::Write as _;

use conic_qed::opse::{purcell_all, Orientation};
use conic_qed::tpse::{spectral_enhancement_ss, total_rate_ratio};
use conic_qed::{Error as CoreError, NumericsConfig};
use rayon::prelude::*;

/// Failure while evaluating one grid point, carrying the point itself.
#[derive(Debug)]
pub struct SweepError {
    pub q: f64,
    pub keg_rho: f64,
    pub omega_frac: Option<f64>,
    pub source: CoreError,
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.omega_frac {
            Some(w) => write!(
                f,
                "at (q = {}, keg_rho = {}, omega/omega_eg = {}): {}",
                self.q, self.keg_rho, w, self.source
            ),
            None => write!(
                f,
                "at (q = {}, keg_rho = {}): {}",
                self.q, self.keg_rho, self.source
            ),
        }
    }
}

impl SweepError {
    pub fn is_convergence(&self) -> bool {
        matches!(self.source, CoreError::Convergence { .. })
    }
}

/// Inclusive linear grid with at least two points.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

/// Interior frequency grid `i / (points + 1)`, never touching 0 or 1.
pub fn omega_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_param(v: f64) -> String {
    format!("{v}")
}

fn join_params(vs: &[f64]) -> String {
    vs.iter()
        .map(|v| fmt_param(*v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Assembled CSV document.
pub struct Table {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let line = row
                .iter()
                .map(|v| fmt_float(*v))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn numerics_comments(cfg: &NumericsConfig) -> Vec<String> {
    vec![format!(
        "nodes = {}, m-max = {}, rel-tol = {:e}, consecutive-small = {}",
        cfg.quad_nodes, cfg.truncation.m_max, cfg.truncation.rel_tol, cfg.truncation.consecutive_small
    )]
}

fn orientation_columns(selection: Option<Orientation>) -> Vec<Orientation> {
    match selection {
        Some(o) => vec![o],
        None => vec![
            Orientation::Z,
            Orientation::Rho,
            Orientation::Phi,
            Orientation::Isotropic,
        ],
    }
}

fn pick(factors: &conic_qed::PurcellFactors, orient: Orientation) -> f64 {
    match orient {
        Orientation::Z => factors.p_z,
        Orientation::Rho => factors.p_rho,
        Orientation::Phi => factors.p_phi,
        Orientation::Isotropic => factors.p_iso,
    }
}

/// Evaluates one closure per grid point in parallel, keeping row order.
fn evaluate_rows<F>(xs: &[f64], eval: F) -> Result<Vec<Vec<f64>>, SweepError>
where
    F: Fn(f64) -> Result<Vec<f64>, SweepError> + Sync,
{
    xs.par_iter()
        .map(|&x| {
            let mut row = vec![x];
            row.extend(eval(x)?);
            Ok(row)
        })
        .collect()
}

/// OPSE rates against the dimensionless distance, one column bundle per q.
/// A q = 1 control column is always present.
pub fn opse_vs_distance(
    qs: &[f64],
    rho_min: f64,
    rho_max: f64,
    points: usize,
    orientation: Option<Orientation>,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let mut qs_full = qs.to_vec();
    if !qs_full.contains(&1.0) {
        qs_full.insert(0, 1.0);
    }
    let orients = orientation_columns(orientation);
    let mut header = vec!["keg_rho".to_string()];
    for &q in &qs_full {
        for &o in &orients {
            header.push(format!("G{}_q{}", o.label(), fmt_param(q)));
        }
    }
    let xs = linspace(rho_min, rho_max, points);
    let rows = evaluate_rows(&xs, |kr| {
        let mut cells = Vec::with_capacity(qs_full.len() * orients.len());
        for &q in &qs_full {
            let factors = purcell_all(q, kr, cfg).map_err(|source| SweepError {
                q,
                keg_rho: kr,
                omega_frac: None,
                source,
            })?;
            cells.extend(orients.iter().map(|&o| pick(&factors, o)));
        }
        Ok(cells)
    })?;
    let mut comments = vec![
        "conic-qed opse-vs-distance".to_string(),
        format!("q = {}", join_params(&qs_full)),
        format!(
            "rho-min = {}, rho-max = {}, points = {points}",
            fmt_param(rho_min),
            fmt_param(rho_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// OPSE rates against q at fixed distances.
pub fn opse_vs_q(
    keg_rhos: &[f64],
    q_min: f64,
    q_max: f64,
    points: usize,
    orientation: Option<Orientation>,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let orients = orientation_columns(orientation);
    let mut header = vec!["q".to_string()];
    for &kr in keg_rhos {
        for &o in &orients {
            header.push(format!("G{}_kr{}", o.label(), fmt_param(kr)));
        }
    }
    let xs = linspace(q_min, q_max, points);
    let rows = evaluate_rows(&xs, |q| {
        let mut cells = Vec::with_capacity(keg_rhos.len() * orients.len());
        for &kr in keg_rhos {
            let factors = purcell_all(q, kr, cfg).map_err(|source| SweepError {
                q,
                keg_rho: kr,
                omega_frac: None,
                source,
            })?;
            cells.extend(orients.iter().map(|&o| pick(&factors, o)));
        }
        Ok(cells)
    })?;
    let mut comments = vec![
        "conic-qed opse-vs-q".to_string(),
        format!("keg-rho = {}", join_params(keg_rhos)),
        format!(
            "q-min = {}, q-max = {}, points = {points}",
            fmt_param(q_min),
            fmt_param(q_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// Spectral enhancement against the normalized frequency.
pub fn tpse_spectrum(
    qs: &[f64],
    keg_rhos: &[f64],
    points: usize,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let mut header = vec!["omega_frac".to_string()];
    for &q in qs {
        for &kr in keg_rhos {
            header.push(format!("enh_q{}_kr{}", fmt_param(q), fmt_param(kr)));
        }
    }
    let xs = omega_grid(points);
    let rows = evaluate_rows(&xs, |f| {
        let mut cells = Vec::with_capacity(qs.len() * keg_rhos.len());
        for &q in qs {
            for &kr in keg_rhos {
                let e = spectral_enhancement_ss(q, kr, f, cfg).map_err(|source| SweepError {
                    q,
                    keg_rho: kr,
                    omega_frac: Some(f),
                    source,
                })?;
                cells.push(e);
            }
        }
        Ok(cells)
    })?;
    let mut comments = vec![
        "conic-qed tpse-spectrum".to_string(),
        format!("q = {}", join_params(qs)),
        format!("keg-rho = {}", join_params(keg_rhos)),
        format!("points = {points}"),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// Spectral enhancement against distance at fixed frequencies.
pub fn tpse_vs_distance(
    qs: &[f64],
    omega_fracs: &[f64],
    rho_min: f64,
    rho_max: f64,
    points: usize,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let mut header = vec!["keg_rho".to_string()];
    for &q in qs {
        for &f in omega_fracs {
            header.push(format!("enh_q{}_f{}", fmt_param(q), fmt_param(f)));
        }
    }
    let xs = linspace(rho_min, rho_max, points);
    let rows = evaluate_rows(&xs, |kr| {
        let mut cells = Vec::with_capacity(qs.len() * omega_fracs.len());
        for &q in qs {
            for &f in omega_fracs {
                let e = spectral_enhancement_ss(q, kr, f, cfg).map_err(|source| SweepError {
                    q,
                    keg_rho: kr,
                    omega_frac: Some(f),
                    source,
                })?;
                cells.push(e);
            }
        }
        Ok(cells)
    })?;
    let mut comments = vec![
        "conic-qed tpse-vs-distance".to_string(),
        format!("q = {}", join_params(qs)),
        format!("omega-frac = {}", join_params(omega_fracs)),
        format!(
            "rho-min = {}, rho-max = {}, points = {points}",
            fmt_param(rho_min),
            fmt_param(rho_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// Spectral enhancement against q at fixed distance and frequencies.
pub fn tpse_vs_q(
    keg_rhos: &[f64],
    omega_fracs: &[f64],
    q_min: f64,
    q_max: f64,
    points: usize,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let mut header = vec!["q".to_string()];
    for &kr in keg_rhos {
        for &f in omega_fracs {
            header.push(format!("enh_kr{}_f{}", fmt_param(kr), fmt_param(f)));
        }
    }
    let xs = linspace(q_min, q_max, points);
    let rows = evaluate_rows(&xs, |q| {
        let mut cells = Vec::with_capacity(keg_rhos.len() * omega_fracs.len());
        for &kr in keg_rhos {
            for &f in omega_fracs {
                let e = spectral_enhancement_ss(q, kr, f, cfg).map_err(|source| SweepError {
                    q,
                    keg_rho: kr,
                    omega_frac: Some(f),
                    source,
                })?;
                cells.push(e);
            }
        }
        Ok(cells)
    })?;
    let mut comments = vec![
        "conic-qed tpse-vs-q".to_string(),
        format!("keg-rho = {}", join_params(keg_rhos)),
        format!("omega-frac = {}", join_params(omega_fracs)),
        format!(
            "q-min = {}, q-max = {}, points = {points}",
            fmt_param(q_min),
            fmt_param(q_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// Long-format enhancement grid for heatmaps: omega_frac, keg_rho, enhancement.
pub fn tpse_contour(
    q: f64,
    rho_min: f64,
    rho_max: f64,
    points: usize,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let krs = linspace(rho_min, rho_max, points);
    let fs = omega_grid(points);
    let cells: Result<Vec<Vec<Vec<f64>>>, SweepError> = krs
        .par_iter()
        .map(|&kr| {
            fs.iter()
                .map(|&f| {
                    let e =
                        spectral_enhancement_ss(q, kr, f, cfg).map_err(|source| SweepError {
                            q,
                            keg_rho: kr,
                            omega_frac: Some(f),
                            source,
                        })?;
                    Ok(vec![f, kr, e])
                })
                .collect()
        })
        .collect();
    let rows = cells?.into_iter().flatten().collect();
    let mut comments = vec![
        "conic-qed tpse-contour".to_string(),
        format!("q = {}", fmt_param(q)),
        format!(
            "rho-min = {}, rho-max = {}, points = {points}",
            fmt_param(rho_min),
            fmt_param(rho_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header: vec![
            "omega_frac".to_string(),
            "keg_rho".to_string(),
            "enhancement".to_string(),
        ],
        rows,
    })
}

/// Total two-photon rate ratio against distance.
pub fn total_rate(
    qs: &[f64],
    rho_min: f64,
    rho_max: f64,
    points: usize,
    n_omega: usize,
    cfg: &NumericsConfig,
) -> Result<Table, SweepError> {
    let mut header = vec!["keg_rho".to_string()];
    for &q in qs {
        header.push(format!("ratio_q{}", fmt_param(q)));
    }
    let xs = linspace(rho_min, rho_max, points);
    let rows = evaluate_rows(&xs, |kr| {
        qs.iter()
            .map(|&q| {
                total_rate_ratio(q, kr, cfg, n_omega).map_err(|source| SweepError {
                    q,
                    keg_rho: kr,
                    omega_frac: None,
                    source,
                })
            })
            .collect()
    })?;
    let mut comments = vec![
        "conic-qed total-rate".to_string(),
        format!("q = {}", join_params(qs)),
        format!(
            "rho-min = {}, rho-max = {}, points = {points}, n-omega = {n_omega}",
            fmt_param(rho_min),
            fmt_param(rho_max)
        ),
    ];
    comments.extend(numerics_comments(cfg));
    Ok(Table {
        comments,
        header,
        rows,
    })
}
