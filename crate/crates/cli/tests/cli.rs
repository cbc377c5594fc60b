//! End-to-end tests of the robinpol binary: exit codes, emitted files,
//! and the promise that every command's output round-trips through the
//! library parsers.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use robinpol::rearrange::is_cell_sdr;
use robinpol::robin::TemperatureProfile;
use robinpol::GridFunction;
use robinpol_cli::campaign::{parse_jsonl, parse_trace_csv, Summary};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_robinpol"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_constant_source_emits_the_analytic_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let alpha = format!("{:?}", 1.0 / PI);
    let out = run(
        &[
            "solve",
            "--source", "constant(1.0)",
            "--alpha", &alpha,
            "--n-cells", "64",
            "--out", out_dir,
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("robin residual left"), "stdout: {stdout}");
    assert!(stdout.contains("robin residual right"), "stdout: {stdout}");

    let rows = TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution.csv"), "solution.csv")
        .unwrap();
    assert_eq!(rows.len(), 65, "one row per boundary point");
    // Closed form for f = 1, alpha = 1/pi: u(x) = (3 pi^2 - x^2) / 2.
    for &(x, u) in &rows {
        let exact = (3.0 * PI * PI - x * x) / 2.0;
        assert!((u - exact).abs() < 1e-9, "u({x}) = {u}, expected {exact}");
    }
}

#[test]
fn solve_all_zero_file_source_gives_the_zero_profile() {
    let dir = tempfile::tempdir().unwrap();
    let grid = robinpol::Grid::new(32).unwrap();
    let zeros = GridFunction::constant(grid, 0.0).unwrap();
    let src = dir.path().join("zeros.csv");
    std::fs::write(&src, zeros.to_csv()).unwrap();

    let out = run(
        &[
            "solve",
            "--source", &format!("file({})", src.display()),
            "--n-cells", "32",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rows = TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution.csv"), "solution.csv")
        .unwrap();
    for &(x, u) in &rows {
        assert_eq!(u, 0.0, "u({x}) should be exactly zero");
    }
}

#[test]
fn solve_indicator_source_passes_a_concavity_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "solve",
            "--source", "indicator(0.5, 1.2)",
            "--n-cells", "64",
            "--alpha", "0.7",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rows = TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution.csv"), "solution.csv")
        .unwrap();
    // -u'' = f >= 0, so the emitted profile must be concave: every second
    // difference at the uniform boundary spacing stays non-positive.
    let mut worst = f64::NEG_INFINITY;
    for w in rows.windows(3) {
        worst = worst.max(w[2].1 - 2.0 * w[1].1 + w[0].1);
    }
    println!("worst second difference = {worst:e}");
    assert!(worst <= 1e-12, "concavity scan failed: {worst}");
}

#[test]
fn solve_variants_include_the_rearranged_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "solve",
            "--source", "random_piecewise(5)",
            "--seed", "3",
            "--n-cells", "32",
            "--emit-variants",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let sdr_rows =
        TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution_sdr.csv"), "sdr.csv").unwrap();
    let polar_rows =
        TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution_polarized.csv"), "pol.csv")
            .unwrap();
    assert_eq!(sdr_rows.len(), 33);
    assert_eq!(polar_rows.len(), 33);
    // The rearranged source is even and decreasing from 0, so its profile
    // peaks at the center point.
    let peak = sdr_rows
        .iter()
        .cloned()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc });
    assert_eq!(peak.0, 0.0, "u_sdr should peak at x = 0, got {}", peak.0);
}

#[test]
fn verify_clean_run_exits_zero_and_round_trips_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "verify",
            "--trials", "3",
            "--n-cells", "16",
            "--seed", "5",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let jsonl = read(dir.path(), "reports.jsonl");
    let lines = parse_jsonl(&jsonl).unwrap();
    assert!(!lines.is_empty());
    let summary: Summary = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary.reports, lines.len());
    assert_eq!(summary.violated, 0);
    assert_eq!(summary.trials, 3);
    assert_eq!(
        summary.holds + summary.holds_with_equality + summary.not_applicable,
        summary.reports
    );
    println!(
        "{} reports / {} holds / {} equalities / {} n.a.",
        summary.reports, summary.holds, summary.holds_with_equality, summary.not_applicable
    );
}

#[test]
fn verify_with_a_corrupted_checker_exits_one_and_echoes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "verify",
            "--trials", "2",
            "--n-cells", "8",
            "--seed", "5",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[(robinpol_cli::CORRUPT_ENV, "max_comparison")],
    );
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    let stderr = stderr_of(&out);
    assert!(stderr.contains("violated"), "stderr: {stderr}");
    assert!(stderr.contains("max_comparison"), "stderr: {stderr}");
    let summary: Summary = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary.violated, 2, "one corrupted line per trial");
}

#[test]
fn verify_same_seed_twice_is_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args = |out_dir: &str| {
        vec![
            "verify".to_string(),
            "--trials".into(), "2".into(),
            "--n-cells".into(), "8".into(),
            "--seed".into(), "19".into(),
            "--out".into(), out_dir.to_string(),
        ]
    };
    let a = run(
        &args(dir_a.path().to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>(),
        &[],
    );
    let b = run(
        &args(dir_b.path().to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>(),
        &[],
    );
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "stdout must be reproducible");
    assert_eq!(read(dir_a.path(), "reports.jsonl"), read(dir_b.path(), "reports.jsonl"));
    assert_eq!(read(dir_a.path(), "summary.json"), read(dir_b.path(), "summary.json"));
}

#[test]
fn converge_greedy_indicator_hits_the_convention_array_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let half_pi = format!("{:?}", PI / 2.0);
    let out = run(
        &[
            "converge",
            "--source", &format!("indicator({half_pi}, {half_pi})"),
            "--n-cells", "64",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let rows = parse_trace_csv(&read(dir.path(), "trace_greedy.csv"), "trace_greedy.csv").unwrap();
    let last = rows.last().unwrap();
    println!("greedy steps = {}, final l1 = {}", rows.len() - 1, last.l1_distance);
    // All covered cells share the exact value 1.0, so the convention array
    // itself is reachable and the final distance is exactly zero.
    assert_eq!(last.l1_distance, 0.0);
    assert_eq!(last.class_distance, 0.0);
    // The default strategy is greedy, so the canonical trace mirrors it.
    assert_eq!(read(dir.path(), "trace.csv"), read(dir.path(), "trace_greedy.csv"));

    // The random-strategy trace lands in the class as well, monotonically.
    let random =
        parse_trace_csv(&read(dir.path(), "trace_random.csv"), "trace_random.csv").unwrap();
    assert_eq!(random.last().unwrap().class_distance, 0.0);
    for w in random.windows(2) {
        assert!(
            w[1].l1_distance <= w[0].l1_distance + 1e-12,
            "random trace l1 rose: {} -> {}",
            w[0].l1_distance,
            w[1].l1_distance
        );
    }
}

#[test]
fn converge_selected_random_strategy_names_the_canonical_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "converge",
            "--source", "random_piecewise(4)",
            "--seed", "8",
            "--n-cells", "16",
            "--strategy", "random",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(read(dir.path(), "trace.csv"), read(dir.path(), "trace_random.csv"));
}

#[test]
fn rearrange_dump_round_trips_and_is_mass_preserving() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "rearrange",
            "--source", "random_piecewise(5)",
            "--seed", "9",
            "--n-cells", "32",
            "--b", "-0.19634954084936207",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let parse = |name: &str| GridFunction::from_csv(&read(dir.path(), name), name).unwrap();
    let f = parse("source.csv");
    let flat = parse("decreasing.csv");
    let sharp = parse("sdr.csv");
    let polar = parse("polarized.csv");

    let mass = f.integrate();
    for (name, g) in [("f*", &flat), ("f#", &sharp), ("f_H", &polar)] {
        assert!(
            (g.integrate() - mass).abs() < 1e-12,
            "{name} mass {} != {mass}",
            g.integrate()
        );
    }
    assert!(is_cell_sdr(&sharp), "emitted f# must be symmetric decreasing");
    let v = flat.values();
    assert!(v.windows(2).all(|w| w[0] >= w[1]), "f* must be non-increasing");
    let stdout = stdout_of(&out);
    assert!(stdout.contains("class distance"), "stdout: {stdout}");
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "n_cells = 16\nalpha = 2.0\nsource = constant(1.0)\nseed = 4\n",
    )
    .unwrap();

    let out = run(
        &[
            "solve",
            "--config", cfg_path.to_str().unwrap(),
            "--n-cells", "32",
            "--out", dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rows = TemperatureProfile::parse_xy_csv(&read(dir.path(), "solution.csv"), "solution.csv")
        .unwrap();
    assert_eq!(rows.len(), 33, "flag must override the file's n_cells");
    assert!(stdout_of(&out).contains("alpha = 2"), "file alpha must survive");
}

#[test]
fn config_and_io_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--config", "/nonexistent/exp.cfg", "--out", out_dir],
        vec!["solve", "--n-cells", "9", "--out", out_dir],
        vec!["solve", "--source", "mystery(1)", "--out", out_dir],
        vec!["verify", "--tol", "no_such_check=1e-9", "--out", out_dir],
        vec!["solve", "--source", "file(/nonexistent/f.csv)", "--out", out_dir],
        vec!["converge", "--b", "0.0", "--out", out_dir],
    ];
    for args in cases {
        let out = run(&args, &[]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?} gave {:?}; stderr: {}",
            out.status.code(),
            stderr_of(&out)
        );
        assert!(stderr_of(&out).contains("error"), "args {args:?} printed no error");
    }
}
