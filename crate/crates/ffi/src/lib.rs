//! C ABI for the `homoclinic` solver.
//!
//! Problems and solutions are opaque heap handles created and released by
//! this library. Every fallible function returns an `HcStatus`; on failure
//! a message is kept per thread and read back with `hc_last_error`.
//! Panics never cross the boundary: they are reported as
//! `HC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use homoclinic::config::RunConfig;
use homoclinic::energy;
use homoclinic::lattice::{self, Exponent, LatticeVec};
use homoclinic::solver::{self, Problem, SolutionRecord, SolveError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The configuration could not be parsed or failed validation.
    Config = 3,
    InvalidArgument = 4,
    /// The level lies outside `1..=N` of the problem.
    OutOfRange = 5,
    /// The solver did not certify a solution; see `hc_last_error`.
    Solver = 6,
    /// The output buffer is too short; the required length is reported.
    BufferTooSmall = 7,
    Panic = 8,
}

/// A configured problem instance.
pub struct HcProblem {
    problem: Problem,
    levels: usize,
}

/// A certified minimizer at one level.
pub struct HcSolution {
    record: SolutionRecord,
}

/// Scalar summary of an `HcSolution`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HcSummary {
    pub n: usize,
    pub eta: f64,
    pub norm_x: f64,
    pub u_max: f64,
    pub residual_inf: f64,
    pub pg_norm: f64,
    pub iterations: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    /// Nonzero when every certificate holds.
    pub certified: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: HcStatus, msg: impl Into<String>) -> HcStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting a panic into `HC_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> HcStatus) -> HcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(HcStatus::Panic, format!("internal error: {msg}"))
        }
    }
}

unsafe fn lattice_vec(offset: i64, values: *const f64, len: usize) -> Result<LatticeVec, HcStatus> {
    if values.is_null() {
        return Err(fail(HcStatus::NullPointer, "values is null"));
    }
    if len == 0 {
        return Err(fail(HcStatus::InvalidArgument, "values must be nonempty"));
    }
    let vals = std::slice::from_raw_parts(values, len).to_vec();
    LatticeVec::new(offset, vals).map_err(|e| fail(HcStatus::InvalidArgument, e.to_string()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a problem from a JSON run configuration, the same document the
/// command line reads.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_problem_from_json(json: *const c_char, out: *mut *mut HcProblem) -> HcStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "json and out must be non-null");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(HcStatus::InvalidUtf8, "json is not valid UTF-8");
        };
        let cfg = match RunConfig::from_str_with(text, &[]) {
            Ok(c) => c,
            Err(e) => return fail(HcStatus::Config, e.to_string()),
        };
        match cfg.build() {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(HcProblem { problem, levels: cfg.n }));
                HcStatus::Ok
            }
            Err(e) => fail(HcStatus::Config, e.to_string()),
        }
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from `hc_problem_from_json` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_problem_free(problem: *mut HcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of levels `N` in the problem's configuration.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hc_problem_levels(problem: *const HcProblem, out: *mut usize) -> HcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "problem and out must be non-null");
        }
        *out = (*problem).levels;
        HcStatus::Ok
    })
}

/// Energy `J` of the vector with `values[i]` at site `offset + i` and zero
/// elsewhere.
///
/// # Safety
/// `values` must point to `len` doubles; `problem` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_energy(
    problem: *const HcProblem,
    offset: i64,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "problem and out must be non-null");
        }
        let u = match lattice_vec(offset, values, len) {
            Ok(u) => u,
            Err(s) => return s,
        };
        let pr = &(*problem).problem;
        match energy::energy(&u, &pr.weights, pr.p, pr.nl.as_ref(), pr.lambda) {
            Ok(r) => {
                *out = r.j;
                HcStatus::Ok
            }
            Err(e) => fail(HcStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Gradient of `J` at sites `offset - 1 ..= offset + len`, written to `out`,
/// which must hold `len + 2` doubles.
///
/// # Safety
/// `values` must point to `len` doubles and `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hc_gradient(
    problem: *const HcProblem,
    offset: i64,
    values: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> HcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "problem and out must be non-null");
        }
        let u = match lattice_vec(offset, values, len) {
            Ok(u) => u,
            Err(s) => return s,
        };
        if out_len < len + 2 {
            return fail(HcStatus::BufferTooSmall, format!("gradient needs {} entries", len + 2));
        }
        let pr = &(*problem).problem;
        let g = energy::grad(&u, &pr.weights, pr.p, pr.nl.as_ref(), pr.lambda);
        std::slice::from_raw_parts_mut(out, len + 2).copy_from_slice(g.values());
        HcStatus::Ok
    })
}

/// Minimizes `J` over the box of level `n` and returns the certified
/// solution. On `HC_STATUS_SOLVER` no solution is returned.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hc_solve_level(problem: *const HcProblem, n: usize, out: *mut *mut HcSolution) -> HcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "problem and out must be non-null");
        }
        *out = ptr::null_mut();
        let hp = &*problem;
        if n == 0 || n > hp.levels {
            return fail(HcStatus::OutOfRange, format!("level {n} outside 1..={}", hp.levels));
        }
        match solver::minimize_on_wn(n, &hp.problem) {
            Ok(record) => {
                *out = Box::into_raw(Box::new(HcSolution { record }));
                HcStatus::Ok
            }
            Err(e @ SolveError::LevelOutOfRange { .. }) => fail(HcStatus::OutOfRange, e.to_string()),
            Err(e) => fail(HcStatus::Solver, e.to_string()),
        }
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from `hc_solve_level` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_free(solution: *mut HcSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_summary(solution: *const HcSolution, out: *mut HcSummary) -> HcStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return fail(HcStatus::NullPointer, "solution and out must be non-null");
        }
        let r = &(*solution).record;
        let c = &r.certificates;
        *out = HcSummary {
            n: r.n,
            eta: r.eta,
            norm_x: r.norm_x,
            u_max: r.u_max,
            residual_inf: r.residual_inf,
            pg_norm: r.pg_norm,
            iterations: r.iterations,
            window_lo: r.window.0,
            window_hi: r.window.1,
            certified: u8::from(c.claim2_bounds && c.residual_ok && c.tail_ok && c.converged),
        };
        HcStatus::Ok
    })
}

/// Copies the solution values at sites `window_lo ..= window_hi` into
/// `buf`. `written` receives the number of values, or the required length
/// when the buffer is too small.
///
/// # Safety
/// `buf` must point to `len` doubles; `solution` and `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_values(
    solution: *const HcSolution,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> HcStatus {
    guard(|| {
        if solution.is_null() || written.is_null() {
            return fail(HcStatus::NullPointer, "solution and written must be non-null");
        }
        let vals = (*solution).record.u.values();
        *written = vals.len();
        if len < vals.len() {
            return fail(HcStatus::BufferTooSmall, format!("solution has {} values", vals.len()));
        }
        if buf.is_null() {
            return fail(HcStatus::NullPointer, "buf is null");
        }
        std::slice::from_raw_parts_mut(buf, vals.len()).copy_from_slice(vals);
        HcStatus::Ok
    })
}

/// `phi_p(t) = |t|^(p-2) t` for `p > 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_phi_p(t: f64, p: f64, out: *mut f64) -> HcStatus {
    guard(|| {
        if out.is_null() {
            return fail(HcStatus::NullPointer, "out is null");
        }
        match Exponent::new(p) {
            Ok(p) => {
                *out = lattice::phi_p(t, p);
                HcStatus::Ok
            }
            Err(e) => fail(HcStatus::InvalidArgument, e.to_string()),
        }
    })
}
