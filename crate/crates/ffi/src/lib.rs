//! C ABI over the finjet engine.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free` function. Every call returns a [`FinjetStatus`]; on a
//! nonzero status `finjet_last_error` holds a message for the calling
//! thread. Strings handed out by the library are freed with
//! `finjet_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finjet::cli::{diff_reports, eval_quantity, load_path, load_str, verify, DiffLine, Loaded, Report};
use finjet::error::FinjetError;
use finjet::finsler::PointOnSlit;

/// Status codes. 0 to 3 coincide with the exit codes of the `finjet` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinjetStatus {
    Ok = 0,
    /// A verification check failed or a residual regressed.
    CheckFailed = 1,
    /// Bad configuration, expression or argument value.
    Config = 2,
    /// Numeric domain error, invalid model or point outside the domain.
    Numeric = 3,
    NullPointer = 4,
    /// The output buffer is too small; the needed length is still written.
    BufferTooSmall = 5,
    Internal = 6,
}

/// A loaded scenario: model, maps, symbols, densities and sampling setup.
pub struct FinjetScenario {
    inner: Loaded,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn from_engine(e: FinjetError) -> FinjetStatus {
    let status = if e.exit_code() == 3 { FinjetStatus::Numeric } else { FinjetStatus::Config };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<FinjetStatus, FinjetStatus>) -> FinjetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => {
            if s == FinjetStatus::Ok {
                set_error("");
            }
            s
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            FinjetStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, FinjetStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(FinjetStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        FinjetStatus::Config
    })
}

unsafe fn handle<'a>(h: *const FinjetScenario) -> Result<&'a FinjetScenario, FinjetStatus> {
    h.as_ref().ok_or_else(|| {
        set_error("scenario handle is null");
        FinjetStatus::NullPointer
    })
}

fn hand_out(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn store(out: *mut *mut FinjetScenario, l: Loaded) -> Result<FinjetStatus, FinjetStatus> {
    if out.is_null() {
        set_error("output pointer is null");
        return Err(FinjetStatus::NullPointer);
    }
    unsafe { *out = Box::into_raw(Box::new(FinjetScenario { inner: l })) };
    Ok(FinjetStatus::Ok)
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn finjet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Engine version, a static string.
#[no_mangle]
pub extern "C" fn finjet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn finjet_scenario_load(json: *const c_char, out: *mut *mut FinjetScenario) -> FinjetStatus {
    guard(|| {
        let l = load_str(text(json, "json")?).map_err(from_engine)?;
        store(out, l)
    })
}

/// Reads a scenario file.
///
/// # Safety
/// As for [`finjet_scenario_load`].
#[no_mangle]
pub unsafe extern "C" fn finjet_scenario_load_file(path: *const c_char, out: *mut *mut FinjetScenario) -> FinjetStatus {
    guard(|| {
        let l = load_path(std::path::Path::new(text(path, "path")?)).map_err(from_engine)?;
        store(out, l)
    })
}

/// A scenario holding only a model, given as the JSON of the `model` entry.
///
/// # Safety
/// As for [`finjet_scenario_load`].
#[no_mangle]
pub unsafe extern "C" fn finjet_scenario_from_model(model_json: *const c_char, out: *mut *mut FinjetScenario) -> FinjetStatus {
    guard(|| {
        let m = text(model_json, "model_json")?;
        let l = load_str(&format!("{{\"model\": {m}}}")).map_err(from_engine)?;
        store(out, l)
    })
}

/// # Safety
/// `h` must come from a `finjet_scenario_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn finjet_scenario_free(h: *mut FinjetScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Base dimension of the scenario's model, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn finjet_scenario_dim(h: *const FinjetScenario) -> usize {
    h.as_ref().map_or(0, |s| s.inner.dim())
}

/// Evaluates a quantity (`F`, `g`, `A`, `omega`, `N`, `chern`, `berwald`,
/// `cartan`, `landsberg`, `sasaki`, `betas`) at `(x, y)`, each of length
/// `n`. Values go to `out` in row-major order; `*len` receives their count.
/// `x` and `y` may be null for `betas`.
///
/// # Safety
/// `x`, `y` must point to `n` doubles, `out` to `cap` doubles, `len` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn finjet_eval(
    h: *const FinjetScenario,
    quantity: *const c_char,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FinjetStatus {
    guard(|| {
        let s = handle(h)?;
        let q = text(quantity, "quantity")?;
        if len.is_null() || (out.is_null() && cap > 0) {
            set_error("output pointer is null");
            return Err(FinjetStatus::NullPointer);
        }
        let pt = if x.is_null() || y.is_null() {
            None
        } else {
            let xs = std::slice::from_raw_parts(x, n).to_vec();
            let ys = std::slice::from_raw_parts(y, n).to_vec();
            Some(PointOnSlit::new(xs, ys).map_err(from_engine)?)
        };
        let rows = eval_quantity(&s.inner, pt.as_ref(), q).map_err(from_engine)?;
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        *len = flat.len();
        if flat.len() > cap {
            set_error(format!("buffer holds {cap} values, {} needed", flat.len()));
            return Err(FinjetStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len());
        Ok(FinjetStatus::Ok)
    })
}

/// Runs verification suites and writes the report JSON to `*report`.
/// `suites` is a comma-separated list, null or empty for all. `seed` is used
/// when `use_seed` is nonzero; a NaN `tol` keeps the per-suite tolerances.
/// Returns `CheckFailed` when the report holds a failing check.
///
/// # Safety
/// `h` must be live, `suites` null or NUL-terminated, `report` writable.
#[no_mangle]
pub unsafe extern "C" fn finjet_verify(
    h: *const FinjetScenario,
    suites: *const c_char,
    seed: u64,
    use_seed: i32,
    tol: f64,
    report: *mut *mut c_char,
) -> FinjetStatus {
    guard(|| {
        let s = handle(h)?;
        if report.is_null() {
            set_error("report pointer is null");
            return Err(FinjetStatus::NullPointer);
        }
        let names: Vec<String> = if suites.is_null() {
            Vec::new()
        } else {
            text(suites, "suites")?.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
        };
        let tol = if tol.is_nan() { None } else { Some(tol) };
        let seed = (use_seed != 0).then_some(seed);
        let r = verify(&s.inner, &names, seed, tol).map_err(from_engine)?;
        *report = hand_out(r.to_json());
        if r.all_pass() {
            Ok(FinjetStatus::Ok)
        } else {
            set_error("one or more checks failed");
            Ok(FinjetStatus::CheckFailed)
        }
    })
}

/// Compares two report JSON texts. The difference lines go to `*lines`, one
/// per line. Returns `CheckFailed` when a residual regressed.
///
/// # Safety
/// Both texts must be NUL-terminated, `lines` writable.
#[no_mangle]
pub unsafe extern "C" fn finjet_report_diff(
    baseline: *const c_char,
    candidate: *const c_char,
    lines: *mut *mut c_char,
) -> FinjetStatus {
    guard(|| {
        let a = Report::from_json(text(baseline, "baseline")?).map_err(from_engine)?;
        let b = Report::from_json(text(candidate, "candidate")?).map_err(from_engine)?;
        if lines.is_null() {
            set_error("lines pointer is null");
            return Err(FinjetStatus::NullPointer);
        }
        let d = diff_reports(&a, &b).map_err(from_engine)?;
        let regressed = d.iter().any(|l| matches!(l, DiffLine::Regressed { .. }));
        *lines = hand_out(d.iter().map(|l| format!("{l}\n")).collect());
        Ok(if regressed { FinjetStatus::CheckFailed } else { FinjetStatus::Ok })
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn finjet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
