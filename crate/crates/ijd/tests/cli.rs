use std::path::{Path, PathBuf};
use std::process::Command;

use ijd::cli::{cli_main, EXIT_ERROR, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use ijd::io::{read_binary, read_csv};
use ijd::verifier::VerdictBundle;
use ijd_core::sim::Scheme;

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ijd").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_listing() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("verify"));
    let (code, out, _) = run(&["examples", "list"]);
    assert_eq!(code, EXIT_PASS);
    for name in ijd_core::examples::EXAMPLE_NAMES {
        assert!(out.contains(name), "{name} missing from listing");
    }
}

#[test]
fn usage_errors_exit_64_with_schema_help() {
    for args in [&[][..], &["frobnicate"][..], &["check"][..], &["simulate", "x.json", "--scheme", "sideways", "--out", "p.csv"][..]] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(err.contains("spec_version"), "schema help missing for {args:?}");
    }
}

#[test]
fn check_exit_codes() {
    let (code, out, _) = run(&["check", s(&spec("circle"))]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.contains("drift_tangent"));
    let (code, out, _) = run(&["check", s(&spec("circle_tampered"))]);
    assert_eq!(code, EXIT_FAIL, "{out}");
}

#[test]
fn check_json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let (code, out, _) = run(&["check", s(&spec("ou_cone")), "--json", "--out", s(&file)]);
    assert_eq!(code, EXIT_PASS);
    let printed: serde_json::Value = serde_json::from_str(&out).unwrap();
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(printed, written);
    assert!(printed["conditions"].as_array().unwrap().iter().any(|e| e["id"] == "ou_semigroup_cone"));
}

#[test]
fn malformed_spec_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_spec.json");
    std::fs::write(&bad, "{\n  \"spec_version\": 1,\n  \"model\": {\"builtin\": {\"kind\": \"torus\"}},\n  \"chart\": {}\n}\n").unwrap();
    let (code, _, err) = run(&["check", s(&bad)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 3"), "{err}");

    let mut v2: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(spec("circle")).unwrap()).unwrap();
    v2["spec_version"] = 2.into();
    std::fs::write(&bad, v2.to_string()).unwrap();
    let (code, _, err) = run(&["check", s(&bad)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("spec_version"), "{err}");

    let (code, _, _) = run(&["check", s(&dir.path().join("missing.json"))]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn unknown_example_is_an_error() {
    let (code, _, err) = run(&["examples", "run", "torus"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("torus"));
}

#[test]
fn examples_run_circle_passes() {
    let (code, out, _) = run(&["examples", "run", "circle", "--paths", "32", "--dt", "0.004"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.contains("agreement: true"));
}

#[test]
fn verify_ball_writes_bundle_with_requested_paths() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bundle.json");
    let (code, out, _) = run(&["verify", s(&spec("ball")), "--paths", "500", "--dt", "0.01", "--out", s(&file)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    let bundle: VerdictBundle = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(bundle.ambient.as_ref().unwrap().n_paths, 500);
    assert_eq!(bundle.chart.as_ref().unwrap().n_paths, 500);
    assert_eq!(bundle.convergence.len(), 3);
    assert!(bundle.agreement);
    assert!(bundle.chart.unwrap().max_dist < 1e-8);
}

#[test]
fn tampered_circle_is_a_consistent_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bundle.json");
    let (code, _, _) = run(&["verify", s(&spec("circle_tampered")), "--paths", "64", "--dt", "0.004", "--out", s(&file)]);
    assert_eq!(code, EXIT_FAIL);
    let bundle: VerdictBundle = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert!(!bundle.conditions_pass);
    assert!(bundle.agreement, "{:?}", bundle.discrepancy);
}

#[test]
fn simulate_exports_match() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("paths.csv");
    let bin = dir.path().join("paths.bin");
    let base = ["--paths", "5", "--dt", "0.01", "--seed", "3"];
    let (code, _, err) = run(&[&["simulate", s(&spec("circle")), "--scheme", "chart", "--out", s(&csv)][..], &base[..]].concat());
    assert_eq!(code, EXIT_PASS, "{err}");
    let (code, _, err) =
        run(&[&["simulate", s(&spec("circle")), "--scheme", "chart", "--out", s(&bin), "--format", "binary"][..], &base[..]].concat());
    assert_eq!(code, EXIT_PASS, "{err}");
    let a = read_csv(std::fs::File::open(&csv).unwrap(), Scheme::ChartProjected).unwrap();
    let b = read_binary(std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.paths.len(), 5);
    for p in &a.paths {
        // grid times plus one row per jump
        assert!(p.times.len() >= 101);
        assert!(p.times.windows(2).all(|w| w[0] <= w[1]));
        assert!((p.times.last().unwrap() - 1.0).abs() < 1e-12);
    }
    for p in &a.paths {
        for h in p.states.chunks(2) {
            assert!((h[0].hypot(h[1]) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn chart_simulation_of_a_non_invariant_model_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("sigma.json");
    let mut spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(spec("hjm_affine_toy")).unwrap()).unwrap();
    spec["model"]["affine"]["sigma"] = serde_json::json!([[0.0, 0.0, 0.2]]);
    std::fs::write(&bad, spec.to_string()).unwrap();
    let out = dir.path().join("p.csv");
    let (code, _, err) = run(&["simulate", s(&bad), "--scheme", "chart", "--out", s(&out)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("sigma_tangent"), "{err}");
    let (code, _, _) = run(&["check", s(&bad)]);
    assert_eq!(code, EXIT_FAIL);
}

#[test]
fn verify_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bundles = Vec::new();
    for threads in ["1", "3", "1"] {
        let file = dir.path().join(format!("bundle{}.json", bundles.len()));
        let status = Command::new(env!("CARGO_BIN_EXE_ijd"))
            .args(["verify", s(&spec("circle")), "--paths", "24", "--dt", "0.01", "--out", s(&file)])
            .env("IJD_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(EXIT_PASS));
        bundles.push(std::fs::read(&file).unwrap());
    }
    assert_eq!(bundles[0], bundles[1]);
    assert_eq!(bundles[0], bundles[2]);
}

#[test]
fn binary_exits_with_usage_code() {
    let status = Command::new(env!("CARGO_BIN_EXE_ijd")).arg("--bogus").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
}
