use std::process::{Command, Output};

fn sca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sca"))
        .args(args)
        .output()
        .expect("sca runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of column `name` in the first data row of CSV text.
fn csv_field(text: &str, name: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    row[i].to_string()
}

#[test]
fn eval_reports_unity_at_the_perfect_point() {
    let o = sca(&[
        "eval",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "1",
        "--intensity-gain",
        "1.8",
        "--t2-sq",
        "0.9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("fidelity=1.000000"), "{}", stdout(&o));
}

#[test]
fn eval_high_gain_fidelity() {
    let o = sca(&[
        "eval",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "1",
        "--intensity-gain",
        "400",
        "--t2-sq",
        "0.9",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let f: f64 = csv_field(&stdout(&o), "fidelity").parse().unwrap();
    assert!((f - 0.9820).abs() < 1e-3, "{f}");
}

#[test]
fn blind_heralding_detector_exits_three() {
    let o = sca(&[
        "eval",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "1",
        "--intensity-gain",
        "2",
        "--eta2",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("device never succeeds"));
    let o = sca(&[
        "eval",
        "--ensemble",
        "phase",
        "--alpha-sq",
        "1",
        "--intensity-gain",
        "2",
        "--eta2",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validation_failures_exit_two_with_one_line() {
    let cases: &[&[&str]] = &[
        &["compare", "--ensemble", "binary", "--trials", "0"],
        &[
            "eval",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "0.8",
        ],
        &[
            "eval",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "-1",
            "--intensity-gain",
            "2",
        ],
        &[
            "eval",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "2",
            "--eta1",
            "1.5",
        ],
        &[
            "eval",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "2",
            "--dark1",
            "0.01",
        ],
        &[
            "eval",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "2",
            "--t2-sq",
            "0.9",
            "--r2-sq",
            "0.1",
        ],
        &["eval", "--alpha-sq", "1", "--intensity-gain", "2"],
        &["eval", "--ensemble", "binary", "--intensity-gain", "2"],
        &[
            "eval",
            "--ensemble",
            "ternary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "2",
        ],
        &["sweep", "--preset", "fig3", "--eta1", "0.5"],
        &[
            "simulate",
            "--ensemble",
            "binary",
            "--alpha-sq",
            "1",
            "--intensity-gain",
            "2",
            "--workers",
            "0",
        ],
    ];
    for args in cases {
        let o = sca(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert_eq!(
            stderr(&o).trim_end().lines().count(),
            1,
            "{args:?}: {}",
            stderr(&o)
        );
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn r2_sq_is_the_complement_of_t2_sq() {
    let base = [
        "eval",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "0.5",
        "--intensity-gain",
        "3",
        "--format",
        "csv",
    ];
    let a = sca(&[&base[..], &["--t2-sq", "0.9"]].concat());
    let b = sca(&[&base[..], &["--r2-sq", "0.1"]].concat());
    let fa: f64 = csv_field(&stdout(&a), "fidelity").parse().unwrap();
    let fb: f64 = csv_field(&stdout(&b), "fidelity").parse().unwrap();
    assert!((fa - fb).abs() < 1e-12);
}

#[test]
fn help_labels_gain_as_intensity() {
    for sub in ["eval", "simulate", "sweep", "oracle", "compare"] {
        let o = sca(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in [
            "--ensemble",
            "--alpha-sq",
            "--intensity-gain",
            "--gain-min",
            "--gain-max",
            "--gain-steps",
            "--t2-sq",
            "--r2-sq",
            "--eta1",
            "--eta2",
            "--dark1",
            "--dark2",
            "--format",
            "--out",
            "--workers",
        ] {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
        assert!(text.contains("Intensity gain G = g²"), "{sub}");
        assert!(text.contains("amplitude gain is sqrt(G)"), "{sub}");
        assert!(!text.contains("--amplitude-gain"));
    }
    assert!(stdout(&sca(&["sweep", "--help"])).contains("--preset"));
    assert!(stdout(&sca(&["compare", "--help"])).contains("--trials"));
}

#[test]
fn compare_detects_an_injected_mismatch() {
    let o = sca(&[
        "compare",
        "--ensemble",
        "phase",
        "--trials",
        "200000",
        "--seed",
        "42",
        "--inject-mc-eta1",
        "0.7",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = sca(&[
        "compare",
        "--ensemble",
        "phase",
        "--trials",
        "200000",
        "--seed",
        "42",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn oracle_agrees_for_both_ensembles() {
    for e in ["binary", "phase"] {
        let o = sca(&["oracle", "--ensemble", e, "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let text = stdout(&o);
        assert_eq!(text.lines().count(), 1 + 3 * 4 * 2);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    }
}

#[test]
fn sweep_file_output_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let o = sca(&["sweep", "--preset", "fig4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&sca(&["sweep", "--preset", "fig4"])));
    assert_eq!(written.lines().count(), 1 + 3 * 60 * 2);
    assert!(written.starts_with("ensemble,alpha_sq,intensity_gain,eta1,eta2,t2_sq,source,"));
}

#[test]
fn sweep_with_explicit_grid_and_both_sources() {
    let o = sca(&[
        "sweep",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "0.1,1",
        "--gain-min",
        "1.5",
        "--gain-max",
        "8",
        "--gain-steps",
        "3",
        "--mode",
        "both",
        "--trials",
        "5000",
        "--format",
        "jsonl",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2 * 3 * 2);
    assert_eq!(rows[0]["source"], "analytic");
    assert_eq!(rows[1]["source"], "mc");
    assert_eq!(rows[0]["intensity_gain"], 1.5);
    assert_eq!(rows[11]["intensity_gain"], 8.0);
}

#[test]
fn simulate_accepts_dark_counts() {
    let o = sca(&[
        "simulate",
        "--ensemble",
        "binary",
        "--alpha-sq",
        "0.5",
        "--intensity-gain",
        "2",
        "--dark1",
        "0.01",
        "--dark2",
        "0.01",
        "--trials",
        "20000",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_field(&stdout(&o), "n_trials"), "20000");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate",
        "--ensemble",
        "phase",
        "--alpha-sq",
        "0.5,1",
        "--intensity-gain",
        "2,4",
        "--trials",
        "50000",
        "--seed",
        "9",
        "--format",
        "jsonl",
    ];
    let a = sca(&args);
    let b = sca(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let one = sca(&[&args[..], &["--workers", "1"]].concat());
    let many = sca(&[&args[..], &["--workers", "5"]].concat());
    assert_eq!(one.stdout, a.stdout);
    assert_eq!(many.stdout, a.stdout);
}
