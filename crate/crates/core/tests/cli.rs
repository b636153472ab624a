//! The `afc` binary: exit codes, outputs and determinism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn afc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afc"))
        .args(args)
        .output()
        .expect("afc runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
        .parse()
        .unwrap()
}

fn output_dir(o: &Output) -> PathBuf {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("output = "))
        .map(PathBuf::from)
        .expect("output directory")
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.toml")
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn efficiency_reports_both_models() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = afc(&["efficiency", "--preset", "fig3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // (1 - e^{-1.5})² e^{-7/16}
    let closed = (1.0 - (-1.5f64).exp()).powi(2) * (-7.0f64 / 16.0).exp();
    assert!((value(&o, "eta_analytic") - closed).abs() < 1e-9);
    assert!(value(&o, "eta_numeric") > 0.0);
    let dir = output_dir(&o);
    for f in ["manifest.toml", "report.toml", "profile.csv", "output.csv"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let run = |seed: &str| {
        let o = afc(&["counts", "--preset", "fig3", "--seed", seed, "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        data_files(&output_dir(&o))
    };
    let a = run("7");
    let b = run("7");
    let c = run("8");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sweep_with_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = afc(&[
        "--workers",
        "2",
        "sweep",
        "--preset",
        "fig3",
        "--axis",
        "alphaL=2:6:3",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "points"), 3.0);
}

#[test]
fn interference_of_equal_waves() {
    let tmp = tempfile::tempdir().unwrap();
    let o = afc(&[
        "interference",
        "--preset",
        "interference-ideal",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((value(&o, "visibility_phase0") - 1.0).abs() < 0.01);
    assert!((value(&o, "phase_difference") - std::f64::consts::PI).abs() < 0.05);
}

#[test]
fn configuration_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[comb]\ndelta = 1.2\nspacing = 3\n").unwrap();
    let missing = tmp.path().join("missing.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["efficiency", "--preset", "no-such-preset", "--out", out],
        vec![
            "efficiency",
            "--config",
            missing.to_str().unwrap(),
            "--out",
            out,
        ],
        vec![
            "efficiency",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out,
        ],
        vec![
            "sweep",
            "--preset",
            "fig3",
            "--axis",
            "depth=1:2:3",
            "--out",
            out,
        ],
        vec!["efficiency", "--no-such-flag"],
    ];
    for args in cases {
        let o = afc(&args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn analysis_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    let rows: String = (0..160)
        .map(|i| format!("{},0\n", -1000.0 + 25.6 * i as f64))
        .collect();
    fs::write(&empty, format!("bin_start_ns,count\n{rows}")).unwrap();
    let o = afc(&[
        "fit",
        "--input",
        empty.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
