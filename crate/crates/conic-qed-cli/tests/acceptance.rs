//! CLI acceptance: figure-level reproduction (criterion 10) and the CSV
//! contract, exercised through the real binary.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Instant;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conic-qed"))
}

fn run_ok(args: &[&str]) -> String {
    let out = binary().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "conic-qed {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn run_err(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_csv(text: &str) -> Csv {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    Csv { header, rows }
}

impl Csv {
    fn column(&self, name: &str) -> Vec<f64> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header));
        self.rows.iter().map(|r| r[idx]).collect()
    }
}

fn report(criterion: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("acceptance {criterion}: {verdict} - {detail}");
    assert!(passed, "{criterion}: {detail}");
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn compare_to_golden(name: &str, actual: &str) -> (usize, f64) {
    let golden = std::fs::read_to_string(golden_path(name)).expect("golden file");
    let g = parse_csv(&golden);
    let a = parse_csv(actual);
    assert_eq!(g.header, a.header, "{name}: header drift");
    assert_eq!(g.rows.len(), a.rows.len(), "{name}: row count drift");
    let mut worst = 0.0_f64;
    let mut cells = 0;
    for (gr, ar) in g.rows.iter().zip(&a.rows) {
        for (gv, av) in gr.iter().zip(ar) {
            let scale = gv.abs().max(1.0);
            worst = worst.max((gv - av).abs() / scale);
            cells += 1;
        }
    }
    (cells, worst)
}

#[test]
fn criterion_10_golden_regression() {
    let cases = [
        (
            "opse_vs_distance.csv",
            vec!["opse-vs-distance", "--q", "2", "--points", "41", "--rho-max", "20"],
        ),
        (
            "tpse_spectrum.csv",
            vec!["tpse-spectrum", "--q", "1.5,2.5", "--keg-rho", "2,4", "--points", "21"],
        ),
        (
            "total_rate.csv",
            vec!["total-rate", "--q", "1.5", "--points", "9", "--rho-max", "8", "--n-omega", "24"],
        ),
        (
            "tpse_contour.csv",
            vec!["tpse-contour", "--q", "1.5", "--points", "7", "--rho-max", "6"],
        ),
    ];
    let mut worst = 0.0_f64;
    let mut total_cells = 0;
    for (name, args) in &cases {
        let out = run_ok(args);
        let (cells, w) = compare_to_golden(name, &out);
        total_cells += cells;
        worst = worst.max(w);
    }
    report(
        "10a golden CSV regression",
        worst <= 1e-9,
        &format!("{total_cells} cells, worst relative drift {worst:.3e}"),
    );
}

#[test]
fn criterion_10_oscillation_decays_with_distance() {
    let out = run_ok(&[
        "opse-vs-distance",
        "--q",
        "2",
        "--points",
        "241",
        "--rho-min",
        "2",
        "--rho-max",
        "26",
    ]);
    let csv = parse_csv(&out);
    let kr = csv.column("keg_rho");
    let gz = csv.column("Gz_q2");
    // oscillation about 1: several sign changes of (G - 1)
    let mut sign_changes = 0;
    for pair in gz.windows(2) {
        if (pair[0] - 1.0) * (pair[1] - 1.0) < 0.0 {
            sign_changes += 1;
        }
    }
    // decay: envelope over the far tail smaller than over the near region
    let near: f64 = kr
        .iter()
        .zip(&gz)
        .filter(|(k, _)| **k < 8.0)
        .map(|(_, g)| (g - 1.0).abs())
        .fold(0.0, f64::max);
    let far: f64 = kr
        .iter()
        .zip(&gz)
        .filter(|(k, _)| **k > 20.0)
        .map(|(_, g)| (g - 1.0).abs())
        .fold(0.0, f64::max);
    report(
        "10b oscillatory decay",
        sign_changes >= 4 && far < near,
        &format!("{sign_changes} sign changes, envelope {near:.3} -> {far:.3}"),
    );
}

#[test]
fn criterion_10_z_intercept_reaches_q() {
    let out = run_ok(&[
        "opse-vs-distance",
        "--q",
        "1.5,2,3",
        "--points",
        "50",
        "--rho-max",
        "10",
    ]);
    let csv = parse_csv(&out);
    let mut worst = 0.0_f64;
    for (name, q) in [("Gz_q1.5", 1.5), ("Gz_q2", 2.0), ("Gz_q3", 3.0)] {
        let col = csv.column(name);
        worst = worst.max((col[0] - q).abs());
    }
    report(
        "10c z-orientation intercept",
        worst <= 1e-12,
        &format!("worst |Gz(0) - q| = {worst:.3e}"),
    );
}

#[test]
fn criterion_10_spectrum_flattens_with_distance() {
    let out = run_ok(&[
        "tpse-spectrum",
        "--q",
        "1.5,2.5",
        "--keg-rho",
        "2,4",
        "--points",
        "33",
    ]);
    let csv = parse_csv(&out);
    let mean_dev = |name: &str| {
        let col = csv.column(name);
        col.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / col.len() as f64
    };
    let q15 = (mean_dev("enh_q1.5_kr2"), mean_dev("enh_q1.5_kr4"));
    let q25 = (mean_dev("enh_q2.5_kr2"), mean_dev("enh_q2.5_kr4"));
    report(
        "10d spectral flattening",
        q15.1 < q15.0 && q25.1 < q25.0,
        &format!("mean |enh - 1|: q=1.5 {:.3} -> {:.3}, q=2.5 {:.3} -> {:.3}", q15.0, q15.1, q25.0, q25.1),
    );
}

#[test]
fn criterion_10_fig2_grid_within_time_budget() {
    let start = Instant::now();
    let out = run_ok(&[
        "opse-vs-distance",
        "--q",
        "1.5,2,2.5,3",
        "--points",
        "300",
        "--rho-max",
        "20",
    ]);
    let elapsed = start.elapsed().as_secs_f64();
    let csv = parse_csv(&out);
    assert_eq!(csv.rows.len(), 300);
    // 4 requested q + control, 4 orientation panels each
    assert_eq!(csv.header.len(), 1 + 5 * 4);
    let finite = csv.rows.iter().flatten().all(|v| v.is_finite());
    report(
        "10e fig-2 grid timing",
        finite && elapsed < 60.0,
        &format!("300x4x4 grid in {elapsed:.2} s"),
    );
}

#[test]
fn spectrum_is_symmetric_under_row_reversal() {
    let out = run_ok(&[
        "tpse-spectrum",
        "--q",
        "2.5",
        "--keg-rho",
        "4",
        "--points",
        "101",
    ]);
    let csv = parse_csv(&out);
    let col = csv.column("enh_q2.5_kr4");
    let mut worst = 0.0_f64;
    for i in 0..col.len() {
        worst = worst.max((col[i] - col[col.len() - 1 - i]).abs());
    }
    report(
        "csv symmetry under row reversal",
        worst <= 1e-12,
        &format!("max |enh(f) - enh(1-f)| = {worst:.3e}"),
    );
}

#[test]
fn free_space_spectrum_is_unity() {
    let out = run_ok(&["tpse-spectrum", "--q", "1", "--keg-rho", "2", "--points", "99"]);
    let csv = parse_csv(&out);
    let col = csv.column("enh_q1_kr2");
    assert_eq!(col.len(), 99);
    let worst = col.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    report(
        "free-space spectrum",
        worst <= 1e-8,
        &format!("max |enh - 1| = {worst:.3e}"),
    );
}

#[test]
fn csv_output_is_bitwise_reproducible() {
    let args = [
        "opse-vs-distance",
        "--q",
        "1.5,2",
        "--points",
        "24",
        "--rho-max",
        "8",
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first, second, "identical parameters must give identical bytes");
    // LF line endings, no NaN/inf anywhere, data rows only after the header
    assert!(!first.contains('\r'));
    assert!(!first.to_lowercase().contains("nan"));
    assert!(!first.to_lowercase().contains("inf"));
    let csv = parse_csv(&first);
    assert_eq!(csv.rows.len(), 24);
    report("csv reproducibility", true, "bitwise identical across runs");
}

#[test]
fn parallelism_does_not_change_bytes() {
    let args = [
        "tpse-spectrum",
        "--q",
        "1.5",
        "--keg-rho",
        "3",
        "--points",
        "31",
    ];
    let one = binary()
        .args(args)
        .env("CONIC_QED_THREADS", "1")
        .output()
        .expect("runs");
    let four = binary()
        .args(args)
        .env("CONIC_QED_THREADS", "4")
        .output()
        .expect("runs");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    report("thread-count independence", true, "1-thread == 4-thread bytes");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["opse-vs-distance", "--q", "0.5"],
        vec!["opse-vs-distance", "--points", "1"],
        vec!["tpse-spectrum", "--q", "abc"],
        vec!["tpse-contour", "--q", "1.5,2.5"],
        vec!["tpse-vs-distance", "--omega-frac", "1.5"],
        vec!["total-rate", "--n-omega", "4"],
        vec!["no-such-command"],
    ] {
        let out = run_err(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "expected exit 2 for {args:?}, got {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    report("usage errors", true, "all bad invocations exit 2");
}

#[test]
fn convergence_failure_exits_three_with_tuple() {
    let out = run_err(&[
        "opse-vs-distance",
        "--q",
        "1.5",
        "--rho-min",
        "24",
        "--rho-max",
        "25",
        "--points",
        "2",
        "--m-max",
        "4",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(3), "stderr: {stderr}");
    // either grid point may surface first under the worker pool; the tuple
    // itself must be present
    assert!(
        stderr.contains("convergence failure at (q = ") && stderr.contains("keg_rho = 2"),
        "diagnostic must carry the failing tuple: {stderr}"
    );
    report("convergence exit code", true, "exit 3 with failing tuple");
}

#[test]
fn convergence_failure_leaves_no_partial_file() {
    let dir = std::env::temp_dir().join("conic_qed_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("partial.csv");
    let _ = std::fs::remove_file(&path);
    let out = binary()
        .args([
            "opse-vs-distance",
            "--q",
            "1.5",
            "--rho-min",
            "24",
            "--rho-max",
            "25",
            "--points",
            "2",
            "--m-max",
            "4",
            "--out",
        ])
        .arg(&path)
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(3));
    assert!(!path.exists(), "no partial output file may remain");
    report("no partial files", true, "failed run leaves nothing behind");
}

#[test]
fn config_file_merges_under_flags() {
    let dir = std::env::temp_dir().join("conic_qed_cli_cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("sweep.cfg");
    std::fs::write(&cfg_path, "points = 7\nrho-max = 5\nq = 2\n").unwrap();
    // flag --points overrides the file; rho-max and q come from the file
    let out = binary()
        .args(["opse-vs-distance", "--points", "9", "--config"])
        .arg(&cfg_path)
        .output()
        .expect("runs");
    assert!(out.status.success());
    let csv = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(csv.rows.len(), 9, "flag wins over config");
    assert!(csv.header.contains(&"Gz_q2".to_string()), "q from config");
    let last = csv.column("keg_rho").last().copied().unwrap();
    assert_eq!(last, 5.0, "rho-max from config");
    // unknown keys are rejected
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "no-such-key = 1\n").unwrap();
    let out = binary()
        .args(["opse-vs-distance", "--config"])
        .arg(&bad)
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
    report("config merging", true, "flags > config > defaults");
}

#[test]
fn selftest_quick_passes() {
    let out = binary().args(["selftest", "--quick"]).output().expect("runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "selftest --quick failed:\n{stdout}"
    );
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 15);
    report("cli selftest --quick", true, "all analytic checks pass");
}

#[test]
fn selftest_reports_failures_by_name_and_exits_one() {
    // a deliberately sloppy m-sum tolerance must be caught
    let out = binary()
        .args(["selftest", "--quick", "--rel-tol", "1e-2"])
        .output()
        .expect("runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "stdout: {stdout}");
    assert!(
        stdout.contains("FAIL free-space-recovery"),
        "failures must be reported by name:\n{stdout}"
    );
    report("selftest sensitivity", true, "loose tolerance detected and named");
}
