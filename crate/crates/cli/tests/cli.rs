use std::process::{Command, Output};

use branchsum_cli::{run, RunConfig};
use serde_json::Value;

const EXE: &str = env!("CARGO_BIN_EXE_branchsum");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/merge_split.json");

fn branchsum(args: &[&str]) -> Output {
    Command::new(EXE).args(args).output().expect("spawn branchsum")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn check_passes_on_conserved_weights() {
    let out = branchsum(&["check", "--input", DATA, "--weights", "1,1,2,2,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["status"], "PASS");
    assert_eq!(r["result"]["conservation"], true);
}

#[test]
fn check_fails_with_exit_five() {
    let out = branchsum(&["check", "--input", DATA, "--weights", "1,1,3,2,1,1"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(json(&out)["result"]["status"], "FAIL");
}

#[test]
fn nullspace_reports_rank_and_nullity() {
    let r = json(&branchsum(&["nullspace", "--input", DATA]));
    assert_eq!(r["result"]["rank"], 3);
    assert_eq!(r["result"]["nullity"], 3);
    assert_eq!(r["result"]["basis"].as_array().unwrap().len(), 3);
}

#[test]
fn count_matches_the_merge_split_instance() {
    let r = json(&branchsum(&["count", "--input", DATA, "--total-weight", "3"]));
    assert_eq!(r["result"]["count"], 4);
    let s = r["result"]["entropy_nats"].as_f64().unwrap();
    assert!((s - 4f64.ln()).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    assert_eq!(branchsum(&["count", "--input", "/nonexistent.json"]).status.code(), Some(3));
    assert_eq!(branchsum(&["count", "--input", DATA]).status.code(), Some(2));
    assert_eq!(
        branchsum(&["count", "--input", DATA, "--total-weight", "60", "--budget", "5"]).status.code(),
        Some(4)
    );
    assert_eq!(
        branchsum(&["count", "--input", DATA, "--total-weight", "5/2"]).status.code(),
        Some(5)
    );
    assert_eq!(branchsum(&["born", "--p", "0.5,0.5", "--hbar", "-1"]).status.code(), Some(2));
    assert_eq!(branchsum(&["born", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        branchsum(&["paths", "--input", DATA, "--cap", "2"]).status.code(),
        Some(4)
    );
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n_dim": 0, "vertices": []}"#).unwrap();
    let out = branchsum(&["nullspace", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn born_rerun_is_identical() {
    let args = ["born", "--p", "0.25,0.75", "--n", "20000", "--seed", "7"];
    let a = branchsum(&args);
    let b = branchsum(&args);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["result"]["counts"].as_array().unwrap().len(), 2);
}

#[test]
fn reports_round_trip_through_their_config() {
    for args in [
        vec!["paths", "--input", DATA, "--list"],
        vec!["propagate", "--model", "harmonic_oscillator", "--omega", "0.7", "--k", "0.1", "--n-samples", "5000"],
        vec!["toy01", "--total-weight", "7", "--steps", "2"],
        vec!["nonlinearity", "--format", "json", "--u0", "2"],
    ] {
        let first = branchsum(&args);
        assert!(first.status.success(), "{args:?}");
        let report = json(&first);
        let config: RunConfig = serde_json::from_value(report["config"].clone()).unwrap();
        let again = run(&config).unwrap();
        assert_eq!(again.report.as_bytes(), first.stdout.as_slice(), "{args:?}");

        let dir = tempfile::tempdir().unwrap();
        let saved = dir.path().join("report.json");
        std::fs::write(&saved, &first.stdout).unwrap();
        let rerun = branchsum(&["--config", saved.to_str().unwrap()]);
        assert_eq!(rerun.stdout, first.stdout, "{args:?}");
    }
}

#[test]
fn csv_reports_carry_the_config() {
    let out = branchsum(&["collapse", "--seed", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# branchsum"));
    let config = lines.next().unwrap().strip_prefix("# config=").unwrap();
    let config: RunConfig = serde_json::from_str(config).unwrap();
    assert_eq!(config.parameters.seed, 2);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "step,w_1,w_2");
    let last = text.lines().last().unwrap();
    let weights: Vec<f64> = last.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert!(weights.iter().filter(|&&w| w > 0.0).count() == 1);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deficit.csv");
    let out = branchsum(&["deficit", "--volumes", "2,3,4", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("volume,simplices,nullity_connected,nullity_blocked,deficit"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn defaults_document_lists_parameters() {
    let out = branchsum(&["defaults"]);
    assert!(out.status.success());
    let d = json(&out);
    for key in ["k", "hbar", "alpha", "b", "w_e", "zeta", "lower_bound", "dw", "budget", "cap", "seed"] {
        assert!(d["parameters"].get(key).is_some(), "missing {key}");
    }
    assert_eq!(d["formats"]["collapse"], "csv");
    assert_eq!(d["formats"]["born"], "json");
    let help = String::from_utf8(branchsum(&["--help"]).stdout).unwrap();
    assert!(help.contains("--seed") && help.contains("default"));
}

#[test]
fn propagate_sampler_switches_past_the_cap() {
    let exact = json(&branchsum(&["propagate", "--sites", "4", "--steps", "4", "--k", "0.5"]));
    let sampled = json(&branchsum(&["propagate", "--sites", "4", "--steps", "4", "--k", "0.5", "--cap", "10"]));
    assert_eq!(exact["result"]["enumerated"], true);
    assert_eq!(sampled["result"]["enumerated"], false);
    assert!(sampled["result"]["z_exact"].is_null());
    let tm = &exact["result"]["transfer_matrix"];
    let z = &exact["result"]["z_exact"];
    for i in 0..2 {
        let (a, b) = (tm[i].as_f64().unwrap(), z[i].as_f64().unwrap());
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // The sampled estimate targets the same expectation.
    let mc = &sampled["result"]["monte_carlo"];
    let want = &exact["result"]["expected_amplitude"];
    for (i, se) in ["stderr_re", "stderr_im"].iter().enumerate() {
        let diff = (mc["estimate"][i].as_f64().unwrap() - want[i].as_f64().unwrap()).abs();
        assert!(diff < 5.0 * mc[se].as_f64().unwrap(), "component {i}: {diff}");
    }
}

#[test]
fn propagate_table_model_uses_given_actions() {
    let r = json(&branchsum(&[
        "propagate", "--input", DATA, "--model", "table", "--table", "0,0,0,0", "--hbar", "2",
    ]));
    let e = &r["result"]["expected_amplitude"];
    assert_eq!(e[0].as_f64().unwrap(), 1.0);
    assert_eq!(e[1].as_f64().unwrap(), 0.0);
    let bad = branchsum(&["propagate", "--input", DATA, "--model", "table", "--table", "0,1"]);
    assert_eq!(bad.status.code(), Some(2));
}
