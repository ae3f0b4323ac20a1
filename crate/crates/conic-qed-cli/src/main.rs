//! Command-line front end: CSV sweeps of the emission rates plus a selftest
//! command.
//!
//! Exit codes: 0 success, 1 runtime/selftest failure, 2 usage error,
//! 3 convergence failure (reported with the failing grid tuple).

mod sweep;

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conic_qed::opse::Orientation;
use conic_qed::{selftest, NumericsConfig, TruncationPolicy};
use sweep::Table;

#[derive(Parser)]
#[command(
    name = "conic-qed",
    about = "Spontaneous-emission rates of a dipole emitter near an idealized cosmic string",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; explicit flags win over file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gauss-Legendre nodes for the u-integrals
    #[arg(long)]
    nodes: Option<usize>,
    /// Hard cap on the angular sum index
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    /// Relative tolerance of the angular-sum truncation
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct OrientationOpt {
    /// Restrict output to one dipole orientation: z, rho, phi or iso
    #[arg(long)]
    orientation: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized OPSE rates vs dimensionless distance (a q = 1 control
    /// column is always included)
    OpseVsDistance {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        orientation: OrientationOpt,
        /// Comma-separated deficit parameters
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "rho-min")]
        rho_min: Option<f64>,
        #[arg(long = "rho-max")]
        rho_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Normalized OPSE rates vs deficit parameter at fixed distances
    OpseVsQ {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        orientation: OrientationOpt,
        /// Comma-separated distances k_eg rho
        #[arg(long = "keg-rho")]
        keg_rho: Option<String>,
        #[arg(long = "q-min")]
        q_min: Option<f64>,
        #[arg(long = "q-max")]
        q_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Spectral enhancement vs normalized frequency
    TpseSpectrum {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "keg-rho")]
        keg_rho: Option<String>,
        /// Number of interior frequency points i/(points+1)
        #[arg(long)]
        points: Option<usize>,
    },
    /// Spectral enhancement vs distance at fixed frequencies
    TpseVsDistance {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "omega-frac")]
        omega_frac: Option<String>,
        #[arg(long = "rho-min")]
        rho_min: Option<f64>,
        #[arg(long = "rho-max")]
        rho_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Spectral enhancement vs deficit parameter
    TpseVsQ {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long = "keg-rho")]
        keg_rho: Option<String>,
        #[arg(long = "omega-frac")]
        omega_frac: Option<String>,
        #[arg(long = "q-min")]
        q_min: Option<f64>,
        #[arg(long = "q-max")]
        q_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Long-format enhancement grid over (omega_frac, keg_rho) for heatmaps
    TpseContour {
        #[command(flatten)]
        common: CommonOpts,
        /// Single deficit parameter
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "rho-min")]
        rho_min: Option<f64>,
        #[arg(long = "rho-max")]
        rho_max: Option<f64>,
        /// Grid points per axis (rows = points^2)
        #[arg(long)]
        points: Option<usize>,
    },
    /// Total two-photon rate ratio vs distance
    TotalRate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "rho-min")]
        rho_min: Option<f64>,
        #[arg(long = "rho-max")]
        rho_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Frequency-quadrature nodes (>= 16)
        #[arg(long = "n-omega")]
        n_omega: Option<usize>,
    },
    /// Run the built-in invariant suite
    Selftest {
        #[command(flatten)]
        common: CommonOpts,
        /// Skip the slow oracle comparisons
        #[arg(long)]
        quick: bool,
    },
}

/// Anything that should terminate the process with a specific code.
enum Failure {
    Usage(String),
    Convergence(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Convergence(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Convergence(m) | Failure::Runtime(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// key=value settings loaded from --config; flags win over these.
struct FileConfig(HashMap<String, String>);

const CONFIG_KEYS: [&str; 14] = [
    "q", "keg-rho", "omega-frac", "points", "rho-min", "rho-max", "q-min", "q-max", "nodes",
    "m-max", "rel-tol", "orientation", "out", "n-omega",
];

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::Runtime(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    usage(format!(
                        "config {} line {}: expected key=value",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let key = key.trim();
                if !CONFIG_KEYS.contains(&key) {
                    return Err(usage(format!(
                        "config {} line {}: unknown key '{key}'",
                        path.display(),
                        lineno + 1
                    )));
                }
                map.insert(key.to_string(), value.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn fill<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<Option<T>, Failure>
    where
        F: FnOnce(&str) -> Result<T, Failure>,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key).map(parse).transpose(),
        }
    }
}

fn parse_f64(key: &str) -> impl Fn(&str) -> Result<f64, Failure> + '_ {
    move |s| {
        s.parse::<f64>()
            .map_err(|_| usage(format!("{key}: expected a number, got '{s}'")))
    }
}

fn parse_usize(key: &str) -> impl Fn(&str) -> Result<usize, Failure> + '_ {
    move |s| {
        s.parse::<usize>()
            .map_err(|_| usage(format!("{key}: expected a positive integer, got '{s}'")))
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, Failure> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|_| usage(format!("{key}: expected comma-separated numbers, got '{s}'")))?;
    if values.is_empty() {
        return Err(usage(format!("{key}: list must not be empty")));
    }
    Ok(values)
}

fn parse_orientation(s: &str) -> Result<Orientation, Failure> {
    match s {
        "z" => Ok(Orientation::Z),
        "rho" => Ok(Orientation::Rho),
        "phi" => Ok(Orientation::Phi),
        "iso" => Ok(Orientation::Isotropic),
        other => Err(usage(format!(
            "orientation must be one of z|rho|phi|iso, got '{other}'"
        ))),
    }
}

fn validate_qs(qs: &[f64]) -> Result<(), Failure> {
    for &q in qs {
        if !q.is_finite() || q < 1.0 {
            return Err(usage(format!("q values must be >= 1, got {q}")));
        }
    }
    Ok(())
}

fn validate_krs(krs: &[f64]) -> Result<(), Failure> {
    for &kr in krs {
        if !kr.is_finite() || kr < 0.0 {
            return Err(usage(format!("keg-rho values must be >= 0, got {kr}")));
        }
    }
    Ok(())
}

fn validate_fracs(fs: &[f64]) -> Result<(), Failure> {
    for &f in fs {
        if !(f > 0.0 && f < 1.0) {
            return Err(usage(format!(
                "omega-frac values must lie strictly inside (0, 1), got {f}"
            )));
        }
    }
    Ok(())
}

fn validate_points(points: usize) -> Result<(), Failure> {
    if points < 2 {
        return Err(usage(format!("points must be at least 2, got {points}")));
    }
    Ok(())
}

fn validate_range(lo: f64, hi: f64, what: &str) -> Result<(), Failure> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(usage(format!("{what}: need min < max, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn build_numerics(common: &CommonOpts, file: &FileConfig) -> Result<NumericsConfig, Failure> {
    let nodes = file
        .fill(common.nodes, "nodes", |s| parse_usize("nodes")(s))?
        .unwrap_or(128);
    let m_max = file
        .fill(common.m_max, "m-max", |s| parse_usize("m-max")(s))?
        .unwrap_or(2000);
    let rel_tol = file
        .fill(common.rel_tol, "rel-tol", |s| parse_f64("rel-tol")(s))?
        .unwrap_or(1e-10);
    let truncation = TruncationPolicy::new(rel_tol, 3, m_max)
        .map_err(|e| usage(format!("invalid truncation settings: {e}")))?;
    NumericsConfig::new(nodes, truncation, Default::default())
        .map_err(|e| usage(format!("invalid numerics settings: {e}")))
}

fn resolve_out(common: &CommonOpts, file: &FileConfig) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
}

fn emit(table: Table, out: Option<PathBuf>) -> Result<(), Failure> {
    let text = table.render();
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep_failure(err: sweep::SweepError) -> Failure {
    if err.is_convergence() {
        Failure::Convergence(format!("convergence failure {err}"))
    } else {
        Failure::Runtime(format!("evaluation failure {err}"))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::OpseVsDistance {
            common,
            orientation,
            q,
            rho_min,
            rho_max,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let qs = resolve_list(&file, q, "q", vec![1.5, 2.0, 2.5, 3.0])?;
            let rho_min = file
                .fill(rho_min, "rho-min", |s| parse_f64("rho-min")(s))?
                .unwrap_or(0.0);
            let rho_max = file
                .fill(rho_max, "rho-max", |s| parse_f64("rho-max")(s))?
                .unwrap_or(20.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(300);
            let orient = file
                .fill(orientation.orientation, "orientation", |s| {
                    Ok(s.to_string())
                })?
                .map(|s| parse_orientation(&s))
                .transpose()?;
            validate_qs(&qs)?;
            validate_points(points)?;
            validate_range(rho_min, rho_max, "rho range")?;
            if rho_min < 0.0 {
                return Err(usage("rho-min must be >= 0"));
            }
            let table = sweep::opse_vs_distance(&qs, rho_min, rho_max, points, orient, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::OpseVsQ {
            common,
            orientation,
            keg_rho,
            q_min,
            q_max,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let krs = resolve_list(&file, keg_rho, "keg-rho", vec![2.0])?;
            let q_min = file
                .fill(q_min, "q-min", |s| parse_f64("q-min")(s))?
                .unwrap_or(1.0);
            let q_max = file
                .fill(q_max, "q-max", |s| parse_f64("q-max")(s))?
                .unwrap_or(5.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(200);
            let orient = file
                .fill(orientation.orientation, "orientation", |s| {
                    Ok(s.to_string())
                })?
                .map(|s| parse_orientation(&s))
                .transpose()?;
            validate_krs(&krs)?;
            validate_points(points)?;
            validate_range(q_min, q_max, "q range")?;
            validate_qs(&[q_min])?;
            let table = sweep::opse_vs_q(&krs, q_min, q_max, points, orient, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::TpseSpectrum {
            common,
            q,
            keg_rho,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let qs = resolve_list(&file, q, "q", vec![1.5])?;
            let krs = resolve_list(&file, keg_rho, "keg-rho", vec![2.0])?;
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(99);
            validate_qs(&qs)?;
            validate_krs(&krs)?;
            validate_points(points)?;
            let table = sweep::tpse_spectrum(&qs, &krs, points, &cfg).map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::TpseVsDistance {
            common,
            q,
            omega_frac,
            rho_min,
            rho_max,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let qs = resolve_list(&file, q, "q", vec![1.5])?;
            let fracs = resolve_list(&file, omega_frac, "omega-frac", vec![0.5])?;
            let rho_min = file
                .fill(rho_min, "rho-min", |s| parse_f64("rho-min")(s))?
                .unwrap_or(0.0);
            let rho_max = file
                .fill(rho_max, "rho-max", |s| parse_f64("rho-max")(s))?
                .unwrap_or(20.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(300);
            validate_qs(&qs)?;
            validate_fracs(&fracs)?;
            validate_points(points)?;
            validate_range(rho_min, rho_max, "rho range")?;
            let table = sweep::tpse_vs_distance(&qs, &fracs, rho_min, rho_max, points, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::TpseVsQ {
            common,
            keg_rho,
            omega_frac,
            q_min,
            q_max,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let krs = resolve_list(&file, keg_rho, "keg-rho", vec![10.0])?;
            let fracs = resolve_list(&file, omega_frac, "omega-frac", vec![0.5])?;
            let q_min = file
                .fill(q_min, "q-min", |s| parse_f64("q-min")(s))?
                .unwrap_or(1.0);
            let q_max = file
                .fill(q_max, "q-max", |s| parse_f64("q-max")(s))?
                .unwrap_or(5.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(200);
            validate_krs(&krs)?;
            validate_fracs(&fracs)?;
            validate_points(points)?;
            validate_range(q_min, q_max, "q range")?;
            validate_qs(&[q_min])?;
            let table = sweep::tpse_vs_q(&krs, &fracs, q_min, q_max, points, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::TpseContour {
            common,
            q,
            rho_min,
            rho_max,
            points,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let qs = resolve_list(&file, q, "q", vec![1.5])?;
            if qs.len() != 1 {
                return Err(usage("tpse-contour takes exactly one q value"));
            }
            let rho_min = file
                .fill(rho_min, "rho-min", |s| parse_f64("rho-min")(s))?
                .unwrap_or(0.0);
            let rho_max = file
                .fill(rho_max, "rho-max", |s| parse_f64("rho-max")(s))?
                .unwrap_or(10.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(50);
            validate_qs(&qs)?;
            validate_points(points)?;
            validate_range(rho_min, rho_max, "rho range")?;
            let table = sweep::tpse_contour(qs[0], rho_min, rho_max, points, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::TotalRate {
            common,
            q,
            rho_min,
            rho_max,
            points,
            n_omega,
        } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let qs = resolve_list(&file, q, "q", vec![1.5])?;
            let rho_min = file
                .fill(rho_min, "rho-min", |s| parse_f64("rho-min")(s))?
                .unwrap_or(0.0);
            let rho_max = file
                .fill(rho_max, "rho-max", |s| parse_f64("rho-max")(s))?
                .unwrap_or(10.0);
            let points = file
                .fill(points, "points", |s| parse_usize("points")(s))?
                .unwrap_or(60);
            let n_omega = file
                .fill(n_omega, "n-omega", |s| parse_usize("n-omega")(s))?
                .unwrap_or(32);
            validate_qs(&qs)?;
            validate_points(points)?;
            validate_range(rho_min, rho_max, "rho range")?;
            if n_omega < 16 {
                return Err(usage("n-omega must be at least 16"));
            }
            let table = sweep::total_rate(&qs, rho_min, rho_max, points, n_omega, &cfg)
                .map_err(sweep_failure)?;
            emit(table, resolve_out(&common, &file))
        }
        Command::Selftest { common, quick } => {
            let file = FileConfig::load(common.config.as_ref())?;
            let cfg = build_numerics(&common, &file)?;
            let outcomes = selftest::run_with(&cfg, quick);
            let mut all_passed = true;
            for o in &outcomes {
                let verdict = if o.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {}: {}", o.name, o.detail);
                all_passed &= o.passed;
            }
            if all_passed {
                println!("selftest: all {} checks passed", outcomes.len());
                Ok(())
            } else {
                Err(Failure::Runtime(format!(
                    "selftest: {} of {} checks failed",
                    outcomes.iter().filter(|o| !o.passed).count(),
                    outcomes.len()
                )))
            }
        }
    }
}

fn resolve_list(
    file: &FileConfig,
    flag: Option<String>,
    key: &str,
    default: Vec<f64>,
) -> Result<Vec<f64>, Failure> {
    match flag.or_else(|| file.get(key).map(str::to_string)) {
        Some(s) => parse_list(key, &s),
        None => Ok(default),
    }
}


fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CONIC_QED_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("conic-qed: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
