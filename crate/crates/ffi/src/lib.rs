//! C interface to `hyperflow`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns an [`HfStatus`];
//! on failure [`hf_last_error`] describes the cause on the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperflow::error::Error;
use hyperflow::formats::{hyper_json, parse_loss};
use hyperflow::lang::{self, parse_prior_expr, Elaborated};
use hyperflow::refinement::{check_refinement, RefinementResult};
use hyperflow::uncertainty::wp_exact;
use hyperflow::{Dist, Hyper};

/// Result codes. The first four agree with the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NotRefines = 1,
    /// Parse, elaboration or other input errors.
    Invalid = 2,
    /// State spaces or dimensions do not agree.
    Mismatch = 3,
    NullArgument = 4,
    /// A string argument is not UTF-8.
    Utf8 = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

/// An elaborated program with its selected prior.
pub struct HfProgram(Elaborated);

/// A hyper-distribution.
pub struct HfHyper(Hyper);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(HfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SpaceMismatch(_)
            | Error::DimensionMismatch(_)
            | Error::IndexMismatch(_)
            | Error::NotMaterialized(_) => HfStatus::Mismatch,
            _ => HfStatus::Invalid,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<HfStatus, Fail>) -> HfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HfStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(HfStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HfStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(HfStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(HfStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn prior_of(prog: &HfProgram, prior: *const c_char) -> Result<Dist, Fail> {
    if prior.is_null() {
        return Ok(prog.0.prior.clone());
    }
    let expr = parse_prior_expr(text(prior, "prior")?).map_err(|e| Fail::from(Error::from(e)))?;
    Ok(prog.0.resolve_prior(&expr)?)
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(HfStatus::Internal, "string contains NUL".into()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and elaborates program text.
#[no_mangle]
pub unsafe extern "C" fn hf_program_parse(src: *const c_char, out: *mut *mut HfProgram) -> HfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let e = lang::load(text(src, "source")?)?;
        *out = Box::into_raw(Box::new(HfProgram(e)));
        Ok(HfStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_program_free(p: *mut HfProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of states of the program.
#[no_mangle]
pub unsafe extern "C" fn hf_program_states(p: *const HfProgram) -> usize {
    p.as_ref().map_or(0, |p| p.0.space.len())
}

/// Runs the program. `prior` is a prior expression such as `(1/2, 1/2)` or
/// a name, or null for the program's own prior.
#[no_mangle]
pub unsafe extern "C" fn hf_program_run(p: *const HfProgram, prior: *const c_char, out: *mut *mut HfHyper) -> HfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let prog = handle(p, "program")?;
        let h = prog.0.hmm.eval(&prior_of(prog, prior)?)?;
        *out = Box::into_raw(Box::new(HfHyper(h)));
        Ok(HfStatus::Ok)
    })
}

/// Expected loss after the program, as an exact `p/q` string to be released
/// with [`hf_string_free`]. `loss` is the text of a loss file.
#[no_mangle]
pub unsafe extern "C" fn hf_wp(
    p: *const HfProgram,
    loss: *const c_char,
    prior: *const c_char,
    out: *mut *mut c_char,
) -> HfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let prog = handle(p, "program")?;
        let l = parse_loss(text(loss, "loss")?, &prog.0.space)?;
        let v = wp_exact(&prog.0.hmm, &l, &prior_of(prog, prior)?)?;
        *out = to_c_string(v.to_string())?;
        Ok(HfStatus::Ok)
    })
}

/// `Ok` when `imp` leaks no more than `spec`, `NotRefines` otherwise.
#[no_mangle]
pub unsafe extern "C" fn hf_refines(spec: *const HfHyper, imp: *const HfHyper) -> HfStatus {
    guard(|| {
        let (s, i) = (handle(spec, "spec")?, handle(imp, "imp")?);
        Ok(match check_refinement(&s.0, &i.0)? {
            RefinementResult::Refines { .. } => HfStatus::Ok,
            RefinementResult::NotRefines { .. } => HfStatus::NotRefines,
        })
    })
}

/// Number of inners.
#[no_mangle]
pub unsafe extern "C" fn hf_hyper_len(h: *const HfHyper) -> usize {
    h.as_ref().map_or(0, |h| h.0.len())
}

/// JSON array of `{"inner": {label: "p/q"}, "outer": "p/q"}` objects.
#[no_mangle]
pub unsafe extern "C" fn hf_hyper_to_json(h: *const HfHyper, out: *mut *mut c_char) -> HfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let h = handle(h, "hyper")?;
        *out = to_c_string(hyper_json(&h.0).to_string())?;
        Ok(HfStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_hyper_free(h: *mut HfHyper) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
