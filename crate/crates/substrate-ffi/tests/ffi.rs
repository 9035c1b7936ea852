use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use substrate_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(substrate_last_error()).to_string_lossy().into_owned() }
}

fn rule(name: &str) -> *mut SubstrateRule {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { substrate_rule_builtin(c(name).as_ptr(), &mut r) }, SubstrateStatus::Ok);
    r
}

fn pattern(r: *const SubstrateRule, spec: &str) -> *mut SubstratePattern {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { substrate_pattern_new(r, c(spec).as_ptr(), 1, &mut p) }, SubstrateStatus::Ok);
    p
}

#[test]
fn mask5_fibre_through_handles() {
    let r = rule("mask5");
    let p = pattern(r, "P_B");
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_fibre(p, 1, &mut rep), SubstrateStatus::Ok);
        assert_eq!(substrate_report_status(rep), SubstrateStatus::Ok);
        assert_eq!(substrate_report_count(rep), 1);
        let json: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(substrate_report_json(rep)).to_str().unwrap()).unwrap();
        assert_eq!(json["count"], 1);
        substrate_report_free(rep);
        let mut letter = 9u8;
        assert_eq!(substrate_pattern_value(p, 0, 0, &mut letter), SubstrateStatus::Ok);
        assert_eq!(letter, 4, "P_B starts with C");
        substrate_pattern_free(p);
        substrate_rule_free(r);
    }
}

#[test]
fn periods_and_recognisability() {
    let tm = rule("thue_morse");
    let p = pattern(tm, "fixed:0");
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_periods(p, 64, &mut rep), SubstrateStatus::Ok);
        assert_eq!(substrate_report_count(rep), 0);
        substrate_report_free(rep);
        assert_eq!(substrate_recognise(tm, 64, &mut rep), SubstrateStatus::Ok);
        assert_eq!(substrate_report_count(rep), 2);
        substrate_report_free(rep);
        substrate_pattern_free(p);
        substrate_rule_free(tm);
    }
}

#[test]
fn inconclusive_keeps_partial_report() {
    let h = rule("half_and_half");
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_recognise(h, 4, &mut rep), SubstrateStatus::Inconclusive);
        assert!(!rep.is_null());
        assert_eq!(substrate_report_status(rep), SubstrateStatus::Inconclusive);
        assert_eq!(substrate_report_count(rep), -1);
        assert!(last_error().starts_with("ambiguous_at_cap"));
        substrate_report_free(rep);
        substrate_rule_free(h);
    }
}

#[test]
fn errors_are_reported() {
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_rule_builtin(ptr::null(), &mut r), SubstrateStatus::NullArgument);
        assert_eq!(substrate_rule_builtin(c("nope").as_ptr(), &mut r), SubstrateStatus::Invalid);
        assert!(r.is_null());
        assert!(last_error().contains("unknown_builtin"));
        let bad = [0xffu8, 0];
        assert_eq!(substrate_rule_builtin(bad.as_ptr().cast(), &mut r), SubstrateStatus::InvalidUtf8);
        assert_eq!(substrate_rule_from_toml(c("kind = 3").as_ptr(), &mut r), SubstrateStatus::Invalid);
        let m = rule("mask5");
        let mut p = ptr::null_mut();
        assert_eq!(substrate_pattern_new(m, c("interior:A@1").as_ptr(), 1, &mut p), SubstrateStatus::Invalid);
        assert!(last_error().contains("invalid_seed"));
        let mut rep = ptr::null_mut();
        assert_eq!(substrate_recognise(m, 0, &mut rep), SubstrateStatus::Invalid);
        assert_eq!(substrate_report_count(ptr::null()), -1);
        assert!(substrate_report_json(ptr::null()).is_null());
        assert_eq!(substrate_rule_dim(ptr::null()), 0);
        substrate_rule_free(ptr::null_mut());
        substrate_rule_free(m);
    }
}

#[test]
fn rule_from_toml() {
    let text = "name = \"fib\"\nkind = \"word\"\nalphabet = [\"a\", \"b\"]\n[rules]\na = \"a b\"\nb = \"a\"\n";
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_rule_from_toml(c(text).as_ptr(), &mut r), SubstrateStatus::Ok);
        assert_eq!(substrate_rule_alphabet_size(r), 2);
        substrate_rule_free(r);
    }
}

#[test]
fn verify_runs_selected_criteria() {
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(substrate_verify(c("5").as_ptr(), &mut rep), SubstrateStatus::Ok);
        assert_eq!(substrate_report_count(rep), 1);
        substrate_report_free(rep);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/substrate.h")).unwrap();
    for name in [
        "substrate_rule_builtin",
        "substrate_rule_from_toml",
        "substrate_pattern_new",
        "substrate_fibre",
        "substrate_periods",
        "substrate_recognise",
        "substrate_verify",
        "substrate_report_json",
        "substrate_report_free",
        "SUBSTRATE_STATUS_INCONCLUSIVE",
        "typedef struct SubstrateRule SubstrateRule;",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

/// Compiles the C smoke test against the header and the static library when a C compiler exists.
#[test]
fn c_smoke_program() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libsubstrate_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
