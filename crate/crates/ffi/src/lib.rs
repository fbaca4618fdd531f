//! C ABI over the solver, certifier and reduction chain.
//!
//! Instances are opaque handles. Every fallible call returns an [`SkStatus`];
//! results come back as JSON strings owned by the caller and released with
//! [`sk_string_free`]. The message of the last failure on the calling thread
//! is available from [`sk_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::json;
use stable_kmeans::exact::parse_rational;
use stable_kmeans::local_search::{iteration_bound, run_local_search};
use stable_kmeans::oracle::{certify_stability_budgeted, DEFAULT_ENUMERATION_BUDGET};
use stable_kmeans::reductions::{full_chain, CnfFormula};
use stable_kmeans::verify::{verify_chain, ChainBudgets, SearchBudget, Verdict};
use stable_kmeans::{Error, MetricInstance, Solution};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    BudgetExceeded = 4,
    Panic = 5,
}

/// Outcome of a chain verification.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

/// Opaque instance handle.
pub struct SkInstance {
    inner: MetricInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(e: &Error) -> SkStatus {
    set_error(e.to_string());
    if e.is_budget() {
        SkStatus::BudgetExceeded
    } else {
        SkStatus::InvalidInput
    }
}

/// Runs `f`, turning panics into [`SkStatus::Panic`].
fn guard(f: impl FnOnce() -> SkStatus) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            SkStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SkStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(SkStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SkStatus::InvalidUtf8
    })
}

unsafe fn give_string(text: String, out: *mut *mut c_char) -> SkStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            SkStatus::Ok
        }
        Err(_) => {
            set_error("result contains a NUL byte");
            SkStatus::InvalidInput
        }
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_from_json(json: *const c_char, out: *mut *mut SkInstance) -> SkStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SkStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match MetricInstance::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SkInstance { inner }));
                SkStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases an instance. NULL is ignored.
///
/// # Safety
/// `inst` must come from [`sk_instance_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_free(inst: *mut SkInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sk_instance_n_points(inst: *const SkInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n_points())
}

/// # Safety
/// `inst` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sk_instance_n_centres(inst: *const SkInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n_centres())
}

/// # Safety
/// `inst` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sk_instance_k(inst: *const SkInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.k())
}

/// Local search from the first `k` centres. With `truncate` set the run stops
/// after the iteration bound. Writes the trace as JSON.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_solve_json(
    inst: *const SkInstance,
    rho: usize,
    truncate: bool,
    out: *mut *mut c_char,
) -> SkStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            set_error("null argument");
            return SkStatus::NullArgument;
        };
        let i = &inst.inner;
        let bound = iteration_bound(i);
        match run_local_search(i, rho, &Solution::first(i.k()), truncate.then_some(bound)) {
            Ok(trace) => give_string(json!({ "iteration_bound": bound, "trace": trace }).to_string(), out),
            Err(e) => fail(&e),
        }
    })
}

/// Certifies stability at factor `alpha` (e.g. `"21/20"` or `"1.05"`).
///
/// # Safety
/// `inst` must be a live handle, `alpha` a NUL-terminated string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sk_certify_json(
    inst: *const SkInstance,
    alpha: *const c_char,
    out: *mut *mut c_char,
) -> SkStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            set_error("null argument");
            return SkStatus::NullArgument;
        };
        let alpha = match read_str(alpha) {
            Ok(a) => a,
            Err(s) => return s,
        };
        let report = parse_rational(alpha)
            .and_then(|a| certify_stability_budgeted(&inst.inner, &a, DEFAULT_ENUMERATION_BUDGET));
        match report.and_then(|r| Ok(serde_json::to_string(&r)?)) {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

fn override_of(k: u32) -> Option<usize> {
    (k != 0).then_some(k as usize)
}

/// Runs the whole reduction chain on a DIMACS CNF. `k_override` = 0 keeps the
/// required wheel copy count. Writes the instance and provenance as JSON.
///
/// # Safety
/// `dimacs` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_reduce_cnf_json(dimacs: *const c_char, k_override: u32, out: *mut *mut c_char) -> SkStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SkStatus::NullArgument;
        }
        let text = match read_str(dimacs) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = CnfFormula::from_dimacs(text).and_then(|phi| full_chain(&phi, override_of(k_override)));
        match result {
            Ok(c) => give_string(
                json!({ "instance": c.instance.to_file(), "provenance": c.provenance }).to_string(),
                out,
            ),
            Err(e) => fail(&e),
        }
    })
}

/// Verifies the chain on a DIMACS CNF with a node cap per search (0 = default).
/// Writes the report as JSON and the verdict to `verdict`.
///
/// # Safety
/// `dimacs` must be a NUL-terminated string; `out` and `verdict` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sk_verify_chain_json(
    dimacs: *const c_char,
    k_override: u32,
    max_nodes: u64,
    out: *mut *mut c_char,
    verdict: *mut SkVerdict,
) -> SkStatus {
    guard(|| {
        if out.is_null() || verdict.is_null() {
            set_error("null output pointer");
            return SkStatus::NullArgument;
        }
        let text = match read_str(dimacs) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let budgets = if max_nodes == 0 {
            ChainBudgets::default()
        } else {
            ChainBudgets::all(SearchBudget::nodes(max_nodes))
        };
        let result = CnfFormula::from_dimacs(text).and_then(|phi| verify_chain(&phi, override_of(k_override), &budgets));
        match result.and_then(|r| Ok((r.verdict, r.to_json()?))) {
            Ok((v, text)) => {
                *verdict = match v {
                    Verdict::Pass => SkVerdict::Pass,
                    Verdict::Fail => SkVerdict::Fail,
                    Verdict::Inconclusive => SkVerdict::Inconclusive,
                };
                give_string(text, out)
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
