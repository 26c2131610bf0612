//! C ABI over the instance generator and the experiment harness.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`VqmStatus`]; the message of the last failure on the calling thread is
//! available from [`vqm_last_error`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use varqite_mkp::harness::{
    io as csvio, parse_methods, run_experiment, ExperimentOptions, ExperimentOutput, MethodSpec,
    SolveConfig,
};
use varqite_mkp::instances::{brute_force_optimum, generate_instance, MkpInstance};
use varqite_mkp::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VqmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    Io = 4,
    Parse = 5,
    Numeric = 6,
    OutOfRange = 7,
    Panic = 99,
}

/// Opaque knapsack instance.
pub struct VqmInstance(MkpInstance);

/// Opaque experiment output: per-trial rows plus the aggregated report.
pub struct VqmResults(ExperimentOutput);

/// One results row in C-friendly form. Missing gaps are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqmTrialRow {
    pub trial: u32,
    pub seed: u64,
    pub mkp_objective: u64,
    pub feasible: bool,
    pub optimal: bool,
    pub qubo_objective: f64,
    pub opt_gap: f64,
    pub opt_gap_mkp: f64,
    pub final_energy: f64,
    pub steps: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> VqmStatus {
    match e {
        Error::InvalidInstance(_) => VqmStatus::InvalidInstance,
        Error::Io(_) => VqmStatus::Io,
        Error::Json(_) | Error::Csv(_) => VqmStatus::Parse,
        Error::NonFinite(_) => VqmStatus::Numeric,
        Error::QubitOutOfRange { .. } | Error::TooLarge { .. } => VqmStatus::OutOfRange,
        _ => VqmStatus::InvalidArgument,
    }
}

/// Runs `f`, recording the error message and mapping panics to `Panic`.
fn guard(f: impl FnOnce() -> Result<(), (VqmStatus, String)>) -> VqmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VqmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            VqmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (VqmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (VqmStatus, String) {
    (VqmStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for the call.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (VqmStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (VqmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vqm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vqm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a seeded instance with `m` knapsacks and `n` items.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_generate(
    seed: u64,
    m: usize,
    n: usize,
    out: *mut *mut VqmInstance,
) -> VqmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = generate_instance(seed, m, n).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(VqmInstance(inst)));
        Ok(())
    })
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_from_json(
    json: *const c_char,
    out: *mut *mut VqmInstance,
) -> VqmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let inst: MkpInstance = serde_json::from_str(text).map_err(|e| lib_err(e.into()))?;
        inst.validate().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(VqmInstance(inst)));
        Ok(())
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_free(inst: *mut VqmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of binary variables (`m * n`), or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_n_vars(inst: *const VqmInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n_vars())
}

/// Writes the instance id as a NUL-terminated string into `buf` of
/// `len` bytes. Fails with `OutOfRange` if it does not fit.
///
/// # Safety
/// `inst` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_id(
    inst: *const VqmInstance,
    buf: *mut c_char,
    len: usize,
) -> VqmStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let id = inst.0.id.as_bytes();
        if id.len() + 1 > len {
            return Err((VqmStatus::OutOfRange, format!("id needs {} bytes", id.len() + 1)));
        }
        ptr::copy_nonoverlapping(id.as_ptr().cast::<c_char>(), buf, id.len());
        *buf.add(id.len()) = 0;
        Ok(())
    })
}

/// Brute-force MKP optimum value.
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqm_instance_optimum(inst: *const VqmInstance, out: *mut u64) -> VqmStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (eval, _) = brute_force_optimum(&inst.0).map_err(lib_err)?;
        *out = eval.objective;
        Ok(())
    })
}

/// Runs `trials` trials of each method in the comma-separated `methods`
/// list (or `"all"`) over `count` instances with default engine settings.
/// With `deterministic` set, runtimes are recorded as 0.
///
/// # Safety
/// `instances` must point to `count` live handles, `methods` must be a
/// NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqm_solve(
    instances: *const *const VqmInstance,
    count: usize,
    methods: *const c_char,
    trials: usize,
    seed: u64,
    deterministic: bool,
    out: *mut *mut VqmResults,
) -> VqmStatus {
    guard(|| {
        if instances.is_null() {
            return Err(null("instances"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let handles = std::slice::from_raw_parts(instances, count);
        let suite = handles
            .iter()
            .map(|h| h.as_ref().map(|i| i.0.clone()).ok_or_else(|| null("instance handle")))
            .collect::<Result<Vec<_>, _>>()?;
        let specs: Vec<MethodSpec> = parse_methods(read_str(methods, "methods")?)
            .map_err(lib_err)?
            .into_iter()
            .map(|m| MethodSpec::new(m).with_trials(trials))
            .collect();
        let opts = ExperimentOptions { record_runtime: !deterministic };
        let output =
            run_experiment(&suite, &specs, &SolveConfig::default(), seed, opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(VqmResults(output)));
        Ok(())
    })
}

/// Releases a results handle; null is ignored.
///
/// # Safety
/// `res` must be null or a handle from [`vqm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vqm_results_free(res: *mut VqmResults) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Number of trial rows, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vqm_results_len(res: *const VqmResults) -> usize {
    res.as_ref().map_or(0, |r| r.0.results.len())
}

/// Copies row `index` (sorted by instance, method, trial) into `out`.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqm_results_row(
    res: *const VqmResults,
    index: usize,
    out: *mut VqmTrialRow,
) -> VqmStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = res.0.results.get(index).ok_or_else(|| {
            (VqmStatus::OutOfRange, format!("row {index} of {}", res.0.results.len()))
        })?;
        *out = VqmTrialRow {
            trial: r.trial as u32,
            seed: r.seed,
            mkp_objective: r.mkp_objective,
            feasible: r.feasible,
            optimal: r.optimal,
            qubo_objective: r.qubo_objective,
            opt_gap: r.opt_gap.unwrap_or(f64::NAN),
            opt_gap_mkp: r.opt_gap_mkp.unwrap_or(f64::NAN),
            final_energy: r.final_energy,
            steps: r.steps,
        };
        Ok(())
    })
}

/// Writes the results table as CSV to `path`.
///
/// # Safety
/// `res` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vqm_results_write_csv(res: *const VqmResults, path: *const c_char) -> VqmStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        csvio::write_results_file(read_str(path, "path")?, &res.0.results).map_err(lib_err)
    })
}

/// Writes the per-method report as CSV to `path`.
///
/// # Safety
/// `res` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vqm_results_write_report(
    res: *const VqmResults,
    path: *const c_char,
) -> VqmStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        csvio::write_report_file(read_str(path, "path")?, &res.0.report).map_err(lib_err)
    })
}
