//! C ABI over `ljet`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Strings returned by the library are
//! released with [`ljet_string_free`]. On any status other than
//! `LJET_STATUS_OK`, [`ljet_last_error`] describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ljet::cli::{self, Command, Options, EXIT_FAILURE, EXIT_OK};
use ljet::expr::Expr;
use ljet::jet::{total_derivative, JetContext};
use ljet::numeric::{eval, Point};
use ljet::problem::Problem;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LjetStatus {
    Ok = 0,
    /// A check ran and failed: not a symmetry, unsolved, residual too large.
    MathFailure = 1,
    InputError = 2,
    NullPointer = 3,
    Internal = 4,
}

/// A parsed problem file.
pub struct LjetProblem {
    inner: Problem,
}

/// An expression together with the context it was parsed in.
pub struct LjetExpr {
    ctx: JetContext,
    expr: Expr,
}

/// Numeric overrides for [`ljet_run`]; zero fields keep the file's values.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LjetOptions {
    /// Nonzero to use `seed`.
    pub has_seed: u8,
    pub seed: u64,
    /// Used when positive.
    pub tolerance: f64,
    /// Used when positive.
    pub degree_bound: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn guarded(f: impl FnOnce() -> LjetStatus) -> LjetStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            LjetStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, LjetStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(LjetStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        LjetStatus::InputError
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failing call on this thread. Valid until the next
/// call into the library on the same thread; never null.
#[no_mangle]
pub extern "C" fn ljet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a problem file.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_problem_from_json(
    json: *const c_char,
    out: *mut *mut LjetProblem,
) -> LjetStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return LjetStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = try_status!(read_str(json, "json"));
        match Problem::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LjetProblem { inner }));
                LjetStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                LjetStatus::InputError
            }
        }
    })
}

/// # Safety
/// `problem` must come from [`ljet_problem_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ljet_problem_free(problem: *mut LjetProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs `command` (`check`, `cover`, `chi`, `reconstruct`, `reduce` or
/// `verify-solution`) and writes the JSON report to `out_json`. The status
/// mirrors the command-line exit code.
///
/// # Safety
/// `problem` must be a live handle, `command` a nul-terminated string,
/// `options` null or valid, and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_run(
    problem: *const LjetProblem,
    command: *const c_char,
    options: *const LjetOptions,
    out_json: *mut *mut c_char,
) -> LjetStatus {
    guarded(|| {
        if out_json.is_null() || problem.is_null() {
            set_error("problem or out_json is null");
            return LjetStatus::NullPointer;
        }
        *out_json = ptr::null_mut();
        let name = try_status!(read_str(command, "command"));
        let command: Command = match name.parse() {
            Ok(c) => c,
            Err(e) => {
                set_error(e);
                return LjetStatus::InputError;
            }
        };
        let o = if options.is_null() {
            LjetOptions::default()
        } else {
            *options
        };
        let opts = Options {
            seed: (o.has_seed != 0).then_some(o.seed),
            tolerance: (o.tolerance > 0.0).then_some(o.tolerance),
            degree_bound: (o.degree_bound > 0).then_some(o.degree_bound),
            solution: None,
        };
        let report = cli::run(command, &(*problem).inner, &opts);
        *out_json = into_c_string(report.to_json().to_string());
        match report.exit_code {
            EXIT_OK => LjetStatus::Ok,
            EXIT_FAILURE => {
                set_error(format!("{} failed", report.command));
                LjetStatus::MathFailure
            }
            _ => {
                let msg = report
                    .get("error")
                    .and_then(|v| v.as_str())
                    .unwrap_or("input error");
                set_error(msg.to_string());
                LjetStatus::InputError
            }
        }
    })
}

unsafe fn emit_expr(out: *mut *mut LjetExpr, ctx: JetContext, expr: Expr) -> LjetStatus {
    *out = Box::into_raw(Box::new(LjetExpr { ctx, expr }));
    LjetStatus::Ok
}

/// Parses `text` over a jet space of the given order with the nonlocal
/// coordinates `w, w1, ...` available.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_parse(
    text: *const c_char,
    order: u32,
    out: *mut *mut LjetExpr,
) -> LjetStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return LjetStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = try_status!(read_str(text, "text"));
        if order == 0 {
            set_error("order must be at least 1");
            return LjetStatus::InputError;
        }
        let ctx = JetContext::new(order).with_nonlocal();
        match ctx.parse(text) {
            Ok(e) => emit_expr(out, ctx, e),
            Err(e) => {
                set_error(e.to_string());
                LjetStatus::InputError
            }
        }
    })
}

/// Parses `text` with the names declared by `problem`.
///
/// # Safety
/// `problem` must be a live handle, `text` a nul-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_parse_in(
    problem: *const LjetProblem,
    text: *const c_char,
    out: *mut *mut LjetExpr,
) -> LjetStatus {
    guarded(|| {
        if out.is_null() || problem.is_null() {
            set_error("problem or out is null");
            return LjetStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = try_status!(read_str(text, "text"));
        let ctx = (*problem).inner.ode.ctx().clone().with_nonlocal();
        match ctx.parse(text) {
            Ok(e) => emit_expr(out, ctx, e),
            Err(e) => {
                set_error(e.to_string());
                LjetStatus::InputError
            }
        }
    })
}

/// Partial derivative with respect to the named coordinate or parameter.
///
/// # Safety
/// `expr` must be a live handle, `symbol` a nul-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_diff(
    expr: *const LjetExpr,
    symbol: *const c_char,
    out: *mut *mut LjetExpr,
) -> LjetStatus {
    guarded(|| {
        if out.is_null() || expr.is_null() {
            set_error("expr or out is null");
            return LjetStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let name = try_status!(read_str(symbol, "symbol"));
        let e = &*expr;
        match e.ctx.resolve(name) {
            Some(s) => emit_expr(out, e.ctx.clone(), e.expr.diff(&s)),
            None => {
                set_error(format!("undeclared symbol `{name}`"));
                LjetStatus::InputError
            }
        }
    })
}

/// Total derivative `D = ∂_t + Σ v_{i+1} ∂_{v_i} + Σ w_{i+1} ∂_{w_i}`.
///
/// # Safety
/// `expr` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_total_derivative(
    expr: *const LjetExpr,
    out: *mut *mut LjetExpr,
) -> LjetStatus {
    guarded(|| {
        if out.is_null() || expr.is_null() {
            set_error("expr or out is null");
            return LjetStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let e = &*expr;
        emit_expr(out, e.ctx.clone(), total_derivative(&e.expr))
    })
}

/// Canonical text of `expr`, or null when `expr` is null.
///
/// # Safety
/// `expr` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_to_string(expr: *const LjetExpr) -> *mut c_char {
    if expr.is_null() {
        set_error("expr is null");
        return ptr::null_mut();
    }
    into_c_string((*expr).expr.to_string())
}

/// Evaluates `expr` with `names[i] = values[i]`.
///
/// # Safety
/// `expr` must be a live handle; `names` and `values` must hold `n`
/// entries (they may be null when `n` is 0); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_eval(
    expr: *const LjetExpr,
    names: *const *const c_char,
    values: *const f64,
    n: usize,
    out: *mut f64,
) -> LjetStatus {
    guarded(|| {
        if expr.is_null() || out.is_null() || (n > 0 && (names.is_null() || values.is_null())) {
            set_error("null argument");
            return LjetStatus::NullPointer;
        }
        let e = &*expr;
        let mut point = Point::new();
        for i in 0..n {
            let name = try_status!(read_str(*names.add(i), "name"));
            let Some(s) = e.ctx.resolve(name) else {
                set_error(format!("undeclared symbol `{name}`"));
                return LjetStatus::InputError;
            };
            point.set(s, *values.add(i));
        }
        match eval(&e.expr, &point) {
            Ok(x) => {
                *out = x;
                LjetStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                LjetStatus::MathFailure
            }
        }
    })
}

/// # Safety
/// `expr` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ljet_expr_free(expr: *mut LjetExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ljet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
