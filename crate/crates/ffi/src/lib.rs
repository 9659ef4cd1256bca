//! C ABI over the binpack toolkit.
//!
//! Instances and results are opaque handles released with their `_free`
//! functions. Every fallible call returns a [`BpStatus`]; on failure the
//! message is available from [`bp_last_error_message`] on the same thread.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and released with [`bp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use binpack::builder::BuildError;
use binpack::checker;
use binpack::io::{self, Format, SolutionDocument};
use binpack::model::Instance;
use binpack::solver::{
    solve_anneal, solve_exact_1d, solve_exact_small, solve_remote, SolverBudget, SolverError,
    SolverResult,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInstance = 4,
    InvalidArgument = 5,
    SolverError = 6,
    RemoteError = 7,
    OutOfRange = 8,
    NoSolution = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpBackend {
    Anneal = 0,
    Exact1d = 1,
    ExactSmall = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BpBudget {
    /// Seconds.
    pub time_limit: f64,
    pub max_iterations: u64,
    pub restarts: u32,
    pub seed: u64,
    pub deterministic: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpPlacement {
    pub bin: usize,
    pub orientation: u8,
    /// Global coordinates; unused axes are 0.
    pub position: [f64; 3],
    pub extents: [u32; 3],
}

pub struct BpInstance(Instance);

pub struct BpResult {
    instance: Instance,
    result: SolverResult,
    /// Deterministic runs omit timings from their documents.
    deterministic: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl ToString) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

type Outcome<T> = Result<T, (BpStatus, String)>;

fn fail<T>(status: BpStatus, message: impl ToString) -> Outcome<T> {
    Err((status, message.to_string()))
}

/// Runs `f`, recording errors and converting panics into [`BpStatus::Panic`].
fn guard(f: impl FnOnce() -> Outcome<()>) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BpStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            BpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Outcome<&'a str> {
    if p.is_null() {
        return fail(BpStatus::NullArgument, "null string argument");
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|e| fail(BpStatus::InvalidUtf8, e))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref()
        .ok_or_else(|| (BpStatus::NullArgument, format!("null {what}")))
}

fn out_string(s: impl Into<Vec<u8>>) -> Outcome<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|e| fail(BpStatus::InvalidArgument, e))
}

fn io_status(e: io::IoError) -> (BpStatus, String) {
    let status = match e {
        io::IoError::Semantic(_) => BpStatus::InvalidInstance,
        _ => BpStatus::ParseError,
    };
    (status, e.to_string())
}

fn solver_status(e: SolverError) -> (BpStatus, String) {
    let status = match e {
        SolverError::Budget(_)
        | SolverError::Dimensionality { .. }
        | SolverError::TooLarge(_)
        | SolverError::Build(BuildError::DegenerateObjective) => BpStatus::InvalidArgument,
        SolverError::Remote(_) => BpStatus::RemoteError,
        _ => BpStatus::SolverError,
    };
    (status, e.to_string())
}

unsafe fn parse_into(source: *const c_char, format: Format, out: *mut *mut BpInstance) -> BpStatus {
    guard(|| {
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let s = text(source)?;
        let instance = io::parse_instance(s.as_bytes(), format).map_err(io_status)?;
        *out = Box::into_raw(Box::new(BpInstance(instance)));
        Ok(())
    })
}

/// Parses a JSON instance.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_from_json(
    json: *const c_char,
    out: *mut *mut BpInstance,
) -> BpStatus {
    parse_into(json, Format::Json, out)
}

/// Parses a text instance.
///
/// # Safety
/// `txt` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_from_txt(
    txt: *const c_char,
    out: *mut *mut BpInstance,
) -> BpStatus {
    parse_into(txt, Format::Txt, out)
}

/// # Safety
/// `instance` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_free(instance: *mut BpInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of items, 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_item_count(instance: *const BpInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.item_count())
}

/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_bin_count(instance: *const BpInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.bin_count())
}

/// 1, 2 or 3; 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_instance_dimensionality(instance: *const BpInstance) -> u8 {
    instance
        .as_ref()
        .map_or(0, |i| i.0.dimensionality().count() as u8)
}

#[no_mangle]
pub extern "C" fn bp_budget_default() -> BpBudget {
    let b = SolverBudget::default();
    BpBudget {
        time_limit: b.time_limit.as_secs_f64(),
        max_iterations: b.max_iterations,
        restarts: b.restarts as u32,
        seed: b.seed,
        deterministic: b.deterministic,
    }
}

unsafe fn budget_from(budget: *const BpBudget) -> Outcome<SolverBudget> {
    let b = match budget.as_ref() {
        Some(b) => *b,
        None => bp_budget_default(),
    };
    if !(b.time_limit.is_finite() && b.time_limit > 0.0) {
        return fail(BpStatus::InvalidArgument, "time limit must be positive");
    }
    Ok(SolverBudget {
        time_limit: Duration::from_secs_f64(b.time_limit),
        max_iterations: b.max_iterations,
        restarts: b.restarts as usize,
        seed: b.seed,
        deterministic: b.deterministic,
    })
}

unsafe fn finish(
    instance: &Instance,
    budget: &SolverBudget,
    result: Result<SolverResult, SolverError>,
    out: *mut *mut BpResult,
) -> Outcome<()> {
    let result = result.map_err(solver_status)?;
    *out = Box::into_raw(Box::new(BpResult {
        instance: instance.clone(),
        result,
        deterministic: budget.deterministic,
    }));
    Ok(())
}

/// Solves with a local backend. A null `budget` uses the defaults. An
/// infeasible outcome still succeeds; query it with [`bp_result_feasible`].
///
/// # Safety
/// `instance` must be a live handle, `budget` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bp_solve(
    instance: *const BpInstance,
    backend: BpBackend,
    budget: *const BpBudget,
    out: *mut *mut BpResult,
) -> BpStatus {
    guard(|| {
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let inst = &reference(instance, "instance")?.0;
        let budget = budget_from(budget)?;
        let result = match backend {
            BpBackend::Anneal => solve_anneal(inst, &budget),
            BpBackend::Exact1d => solve_exact_1d(inst, &budget),
            BpBackend::ExactSmall => solve_exact_small(inst, &budget),
        };
        finish(inst, &budget, result, out)
    })
}

/// Solves through a remote HTTP endpoint.
///
/// # Safety
/// As [`bp_solve`]; `endpoint` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bp_solve_remote(
    instance: *const BpInstance,
    endpoint: *const c_char,
    budget: *const BpBudget,
    out: *mut *mut BpResult,
) -> BpStatus {
    guard(|| {
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let inst = &reference(instance, "instance")?.0;
        let endpoint = text(endpoint)?;
        let budget = budget_from(budget)?;
        finish(inst, &budget, solve_remote(inst, &budget, endpoint), out)
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bp_result_free(result: *mut BpResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_result_feasible(result: *const BpResult) -> bool {
    result.as_ref().is_some_and(|r| r.result.feasible)
}

/// Objective of the best solution, NaN when there is none.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_result_objective(result: *const BpResult) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.result.best_sample())
        .map_or(f64::NAN, |s| s.objective)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_result_bins_used(result: *const BpResult) -> usize {
    result
        .as_ref()
        .and_then(|r| r.result.best.as_ref())
        .map_or(0, |s| s.bins_used_count())
}

/// Placement of `item` in the best solution.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bp_result_placement(
    result: *const BpResult,
    item: usize,
    out: *mut BpPlacement,
) -> BpStatus {
    guard(|| {
        let r = reference(result, "result")?;
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        let best = r
            .result
            .best
            .as_ref()
            .ok_or((BpStatus::NoSolution, "result holds no solution".to_string()))?;
        let p = best.placements.get(item).ok_or((
            BpStatus::OutOfRange,
            format!("item {item} out of range ({} items)", best.placements.len()),
        ))?;
        *out = BpPlacement {
            bin: p.bin,
            orientation: p.orientation,
            position: p.position,
            extents: p.extents,
        };
        Ok(())
    })
}

/// Writes the solution document as JSON.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bp_result_to_json(
    result: *const BpResult,
    out: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let r = reference(result, "result")?;
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        let mut doc = SolutionDocument::new(&r.instance, &r.result);
        if r.deterministic {
            doc = doc.without_timing();
        }
        *out = out_string(doc.to_bytes())?;
        Ok(())
    })
}

/// Draws the best solution as SVG.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bp_result_render_svg(
    result: *const BpResult,
    out: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let r = reference(result, "result")?;
        if out.is_null() {
            return fail(BpStatus::NullArgument, "null output pointer");
        }
        let best = r
            .result
            .best
            .as_ref()
            .ok_or((BpStatus::NoSolution, "result holds no solution".to_string()))?;
        *out = out_string(io::render_svg(&r.instance, best))?;
        Ok(())
    })
}

/// Checks a solution document against `instance`. Writes the violation
/// report as JSON to `report` and feasibility to `feasible`; either may be null.
///
/// # Safety
/// `instance` must be a live handle, `solution_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bp_check_json(
    instance: *const BpInstance,
    solution_json: *const c_char,
    report: *mut *mut c_char,
    feasible: *mut bool,
) -> BpStatus {
    guard(|| {
        let inst = &reference(instance, "instance")?.0;
        let doc = text(solution_json)?;
        let solution = io::read_solution(doc.as_bytes(), inst).map_err(io_status)?;
        let checked =
            checker::check(inst, &solution).or_else(|e| fail(BpStatus::InvalidArgument, e))?;
        if let Some(f) = feasible.as_mut() {
            *f = checked.feasible;
        }
        if !report.is_null() {
            let json =
                serde_json::to_vec_pretty(&checked).or_else(|e| fail(BpStatus::SolverError, e))?;
            *report = out_string(json)?;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
