use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_substrate");

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = Command::new(BIN).args(args).arg("--out").arg(&out).output().unwrap();
    let text = std::fs::read_to_string(&out).unwrap_or_else(|_| String::from_utf8_lossy(&output.stdout).into_owned());
    let report = serde_json::from_str(&text).unwrap_or(Value::Null);
    (output.status.code().unwrap(), report, output)
}

#[test]
fn fibre_report_has_the_envelope() {
    let (code, r, _) = run(&["fibre", "--rule", "mask5", "--pattern", "P_A", "--power", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["tool"], "substrate");
    assert_eq!(r["command"], "fibre");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["count"], 25);
    assert_eq!(r["inputs"]["rule"]["builtin"], "mask5");
    assert!(r.get("timing_ms").is_none());
    assert_eq!(r["inputs_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let args = ["periods", "--rule", "thue_morse", "--pattern", "fixed:1"];
    let a = Command::new(BIN).args(args).output().unwrap();
    let b = Command::new(BIN).args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_appears_only_on_request() {
    let (code, r, _) = run(&["--timing", "primitivity", "--rule", "fibonacci"]);
    assert_eq!(code, 0);
    assert!(r["timing_ms"].is_number());
}

#[test]
fn invalid_input_exits_2() {
    let (code, r, _) = run(&["info", "--rule", "nope"]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["reason"], "unknown_builtin");

    let (code, r, _) = run(&["fibre", "--rule", "mask5", "--pattern", "interior:A@1"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["reason"], "invalid_seed");

    let (code, _, _) = run(&["fibre", "--rule", "mask5", "--pattern", "P_A", "--schedule", "8,4"]);
    assert_eq!(code, 2);
}

#[test]
fn exhausted_caps_exit_3_with_partial_result() {
    let (code, r, _) = run(&["recognise", "--rule", "half_and_half", "--cap", "4"]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "inconclusive");
    assert_eq!(r["error"]["reason"], "ambiguous_at_cap");
    assert!(r["result"]["witness"].is_object());
}

#[test]
fn recognisability_and_inverse_of_thue_morse() {
    let (code, r, _) = run(&["recognise", "--rule", "thue_morse"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["radius"], 2);
    let (code, _, _) = run(&["mld-check", "--rule", "thue_morse"]);
    assert_eq!(code, 0);
}

#[test]
fn half_and_half_boundary_uses_its_hull() {
    let (code, r, _) = run(&["fibre", "--rule", "half_and_half", "--pattern", "T", "--power", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["inputs"]["mode"]["resolved"], "hull");
    assert_eq!(r["result"]["count"], 1);
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let cfg = data("workspace.toml");
    let (code, r, _) = run(&["--config", &cfg, "fibre"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["count"], 25);
    let (code, r, _) = run(&["--config", &cfg, "fibre", "--pattern", "P_B", "--power", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["inputs"]["pattern"]["spec"], "P_B");
    assert_eq!(r["result"]["count"], 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "rule = \"mask5\"\ncolour = \"red\"\n").unwrap();
    let (code, r, _) = run(&["--config", bad.to_str().unwrap(), "info"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["reason"], "config");
}

#[test]
fn rule_files_are_echoed_with_digest() {
    for f in ["fibonacci.toml", "period_doubling.toml", "chair.toml", "square.toml"] {
        let path = data(f);
        let (code, r, _) = run(&["info", "--rule", &path]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(r["inputs"]["rule"]["file"], path.as_str());
        assert_eq!(r["inputs"]["rule"]["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn render_matches_golden_svg() {
    for (rule, golden) in [("chair", "chair_2.svg"), ("penta_gaps", "penta_2.svg")] {
        let out = Command::new(BIN).args(["render", "--rule", rule, "--depth", "2"]).output().unwrap();
        assert!(out.status.success());
        let expected = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(golden)).unwrap();
        assert_eq!(out.stdout, expected, "{rule}");
    }
}

#[test]
fn verify_subset_and_injection() {
    let (code, r, _) = run(&["verify", "--only", "7"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["criteria"].as_array().unwrap().len(), 1);
    let (code, r, _) = run(&["verify", "--only", "7", "--inject", "7"]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "failed");
}

#[test]
fn thread_count_is_validated() {
    let out = Command::new(BIN).env("SUBSTRATE_THREADS", "zero").args(["info", "--rule", "mask5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(BIN).env("SUBSTRATE_THREADS", "2").args(["info", "--rule", "mask5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
