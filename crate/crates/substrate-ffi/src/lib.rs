//! C ABI for substrate.
//!
//! Every handle is opaque and owned by the caller once returned; release it with the matching
//! `_free` function. Functions return a [`SubstrateStatus`]; on anything but `OK` the message
//! is available from [`substrate_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use serde_json::{json, Value};
use substrate::cli::{resolve_mode, resolve_pattern, verify, CliError};
use substrate::patterns::LatticePattern;
use substrate::recog::{
    compute_periods, enumerate_fibre, recognisability_radius, RecognisabilityReport, DEFAULT_WINDOW_SCHEDULE,
};
use substrate::subst::{Language, Rule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstrateStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// The input was rejected (unknown rule, malformed pattern, bad parameter, ...).
    Invalid = 3,
    /// A cap was reached; the report handle, if any, carries the partial result.
    Inconclusive = 4,
    /// An internal error; the library state is unaffected.
    Internal = 5,
}

pub struct SubstrateRule {
    rule: Arc<Rule>,
}

pub struct SubstratePattern {
    rule: Arc<Rule>,
    pattern: LatticePattern,
}

pub struct SubstrateReport {
    status: SubstrateStatus,
    count: i64,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SubstrateStatus, msg: &str) -> SubstrateStatus {
    set_error(msg);
    status
}

fn from_cli(e: &CliError) -> SubstrateStatus {
    let status = match e {
        CliError::Invalid { .. } => SubstrateStatus::Invalid,
        CliError::Inconclusive { .. } => SubstrateStatus::Inconclusive,
    };
    fail(status, &format!("{}: {}", e.reason(), e.message()))
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> SubstrateStatus) -> SubstrateStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SubstrateStatus::Internal, "internal error"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, SubstrateStatus> {
    if p.is_null() {
        return Err(fail(SubstrateStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SubstrateStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn report(status: SubstrateStatus, count: i64, json: &Value) -> SubstrateReport {
    let text = CString::new(json.to_string()).expect("JSON has no nul bytes");
    SubstrateReport { status, count, json: text }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn substrate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn substrate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Looks up a built-in symbolic rule.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_rule_builtin(name: *const c_char, out: *mut *mut SubstrateRule) -> SubstrateStatus {
    guard(|| {
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let name = match str_arg(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Rule::builtin(name) {
            Ok(rule) => {
                write_out(out, SubstrateRule { rule });
                SubstrateStatus::Ok
            }
            Err(e) => from_cli(&e.into()),
        }
    })
}

/// Parses a symbolic rule from TOML text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_rule_from_toml(text: *const c_char, out: *mut *mut SubstrateRule) -> SubstrateStatus {
    guard(|| {
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let text = match str_arg(text) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Rule::from_toml(text) {
            Ok(rule) => {
                write_out(out, SubstrateRule { rule: Arc::new(rule) });
                SubstrateStatus::Ok
            }
            Err(e) => from_cli(&e.into()),
        }
    })
}

/// Dimension of the rule, or 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn substrate_rule_dim(rule: *const SubstrateRule) -> u32 {
    rule.as_ref().map_or(0, |r| r.rule.dim() as u32)
}

/// Number of letters, or 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn substrate_rule_alphabet_size(rule: *const SubstrateRule) -> u32 {
    rule.as_ref().map_or(0, |r| r.rule.alphabet().len() as u32)
}

/// # Safety
/// `rule` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn substrate_rule_free(rule: *mut SubstrateRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// Builds a pattern from a description such as `P_A`, `const:a`, `periodic:a.b` or `fixed:0`.
///
/// # Safety
/// `rule` must be a live handle, `spec` a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_pattern_new(
    rule: *const SubstrateRule,
    spec: *const c_char,
    seed_power: u32,
    out: *mut *mut SubstratePattern,
) -> SubstrateStatus {
    guard(|| {
        let Some(rule) = rule.as_ref() else { return fail(SubstrateStatus::NullArgument, "null rule") };
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let spec = match str_arg(spec) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match resolve_pattern(&rule.rule, spec, seed_power.max(1), None) {
            Ok(pattern) => {
                write_out(out, SubstratePattern { rule: rule.rule.clone(), pattern });
                SubstrateStatus::Ok
            }
            Err(e) => from_cli(&e),
        }
    })
}

/// The letter index at cell `(x0, x1)`; `x1` is ignored in 1-D.
///
/// # Safety
/// `pattern` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_pattern_value(
    pattern: *const SubstratePattern,
    x0: i64,
    x1: i64,
    out: *mut u8,
) -> SubstrateStatus {
    guard(|| {
        let Some(p) = pattern.as_ref() else { return fail(SubstrateStatus::NullArgument, "null pattern") };
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let x1 = if p.pattern.dim() == 1 { 0 } else { x1 };
        *out = p.pattern.value([x0, x1]);
        SubstrateStatus::Ok
    })
}

/// # Safety
/// `pattern` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn substrate_pattern_free(pattern: *mut SubstratePattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

/// Stores `r` (or the partial report of an inconclusive error) in `out`.
unsafe fn finish(r: Result<(i64, Value), CliError>, out: *mut *mut SubstrateReport) -> SubstrateStatus {
    match r {
        Ok((count, v)) => {
            write_out(out, report(SubstrateStatus::Ok, count, &v));
            SubstrateStatus::Ok
        }
        Err(e) => {
            if let CliError::Inconclusive { partial, .. } = &e {
                write_out(out, report(SubstrateStatus::Inconclusive, -1, partial));
            }
            from_cli(&e)
        }
    }
}

/// Pre-images of the pattern under `σ^power`; the report count is the fibre size.
///
/// The space is the admitted language when the pattern looks admitted, else its own hull.
///
/// # Safety
/// `pattern` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_fibre(
    pattern: *const SubstratePattern,
    power: u32,
    out: *mut *mut SubstrateReport,
) -> SubstrateStatus {
    guard(|| {
        let Some(p) = pattern.as_ref() else { return fail(SubstrateStatus::NullArgument, "null pattern") };
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let r = (|| {
            let (mode, _) = resolve_mode(&p.rule, "auto", Some(&p.pattern))?;
            let lang = Language::new(Some(p.rule.clone()), mode);
            let f = enumerate_fibre(&p.rule, &p.pattern, power, &DEFAULT_WINDOW_SCHEDULE, &lang)?;
            Ok((f.len() as i64, f.to_json()))
        })();
        finish(r, out)
    })
}

/// Period group of the pattern; the report count is the rank of its discrete part.
///
/// # Safety
/// `pattern` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_periods(
    pattern: *const SubstratePattern,
    norm_bound: i64,
    out: *mut *mut SubstrateReport,
) -> SubstrateStatus {
    guard(|| {
        let Some(p) = pattern.as_ref() else { return fail(SubstrateStatus::NullArgument, "null pattern") };
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        if norm_bound <= 0 {
            return fail(SubstrateStatus::Invalid, "norm bound must be positive");
        }
        let r = compute_periods(&p.pattern, norm_bound)
            .map(|rep| (rep.group.discrete_rank() as i64, rep.group.to_json()))
            .map_err(CliError::from);
        finish(r, out)
    })
}

/// Recognisability radius of the admitted language; the report count is the radius.
///
/// # Safety
/// `rule` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_recognise(
    rule: *const SubstrateRule,
    cap: i64,
    out: *mut *mut SubstrateReport,
) -> SubstrateStatus {
    guard(|| {
        let Some(rule) = rule.as_ref() else { return fail(SubstrateStatus::NullArgument, "null rule") };
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        if cap <= 0 {
            return fail(SubstrateStatus::Invalid, "cap must be positive");
        }
        let lang = Language::admitted(rule.rule.clone());
        let r = match recognisability_radius(&rule.rule, cap, &lang) {
            Ok(RecognisabilityReport::Found { radius }) => Ok((radius, json!({"recognisable": true, "radius": radius}))),
            Ok(RecognisabilityReport::AmbiguousAtCap { cap, .. }) => Err(CliError::inconclusive(
                "ambiguous_at_cap",
                &format!("two cuttings survive at radius {cap}"),
                json!({"recognisable": null, "cap": cap}),
            )),
            Err(e) => Err(e.into()),
        };
        finish(r, out)
    })
}

/// Runs the acceptance criteria matching `only` (an id or tag; null for all). The report count
/// is the number of criteria passed; the status is `OK` even when some fail.
///
/// # Safety
/// `only` must be null or a valid NUL-terminated string, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn substrate_verify(only: *const c_char, out: *mut *mut SubstrateReport) -> SubstrateStatus {
    guard(|| {
        if out.is_null() {
            return fail(SubstrateStatus::NullArgument, "null output pointer");
        }
        let only = if only.is_null() {
            None
        } else {
            match str_arg(only) {
                Ok(s) => Some(s),
                Err(s) => return s,
            }
        };
        let r = verify::run_suite(only, None).map(|s| {
            let passed = s.outcomes.iter().filter(|o| o.passed).count() as i64;
            (passed, s.to_json())
        });
        finish(r, out)
    })
}

/// `OK` or `INCONCLUSIVE`; `NULL_ARGUMENT` for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn substrate_report_status(report: *const SubstrateReport) -> SubstrateStatus {
    report.as_ref().map_or(SubstrateStatus::NullArgument, |r| r.status)
}

/// The headline number of the report, or -1 when there is none.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn substrate_report_count(report: *const SubstrateReport) -> i64 {
    report.as_ref().map_or(-1, |r| r.count)
}

/// The report as JSON, owned by the handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn substrate_report_json(report: *const SubstrateReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn substrate_report_free(report: *mut SubstrateReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
