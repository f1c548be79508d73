//! C-callable wrapper around the core library: opaque model handles,
//! UTF-8 JSON strings in, heap-allocated strings out, and a status code
//! on every fallible call. The most recent failure message is kept per
//! thread and read back with `imdpa_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use imdpa::abstraction::{
    build_interval_abstraction, build_standard_abstraction, imdpa_to_mdpa,
};
use imdpa::engine::{check_lmc, check_mdpa};
use imdpa::format::{imdpa_to_json, lumped_to_json, mdpa_to_json, parse_model};
use imdpa::model::{partition_by_labels, LabeledMarkovChain};
use imdpa::pctl::parse_formula;

/// Status of a call. Zero means success; anything else leaves a message
/// readable through `imdpa_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImdpaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidModel = 3,
    InvalidFormula = 4,
    EvalFailed = 5,
}

/// Opaque handle to a parsed chain.
pub struct ImdpaModel {
    chain: LabeledMarkovChain,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: ImdpaStatus, msg: impl Into<String>) -> ImdpaStatus {
    let text = CString::new(msg.into())
        .unwrap_or_else(|_| CString::new("error text contained a NUL byte").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

unsafe fn required<'a>(p: *const c_char) -> Result<&'a str, ImdpaStatus> {
    if p.is_null() {
        return Err(fail(ImdpaStatus::NullArgument, "required string argument was NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ImdpaStatus::InvalidUtf8, "string argument was not UTF-8"))
}

unsafe fn optional<'a>(p: *const c_char) -> Result<Option<&'a str>, ImdpaStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| fail(ImdpaStatus::InvalidUtf8, "string argument was not UTF-8"))
}

fn export_string(s: String, out: *mut *mut c_char) -> Result<(), ImdpaStatus> {
    let c = CString::new(s)
        .map_err(|_| fail(ImdpaStatus::EvalFailed, "output contained a NUL byte"))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Parses a chain from JSON and hands back an owned handle.
///
/// # Safety
/// `json` must be a NUL-terminated string or NULL; `out` must point to
/// writable storage for one pointer. The handle must be released with
/// `imdpa_model_free`.
#[no_mangle]
pub unsafe extern "C" fn imdpa_model_parse(
    json: *const c_char,
    out: *mut *mut ImdpaModel,
) -> ImdpaStatus {
    clear_error();
    if out.is_null() {
        return fail(ImdpaStatus::NullArgument, "out pointer was NULL");
    }
    let text = match required(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match parse_model(text) {
        Ok(chain) => {
            *out = Box::into_raw(Box::new(ImdpaModel { chain }));
            ImdpaStatus::Ok
        }
        Err(e) => fail(ImdpaStatus::InvalidModel, e.to_string()),
    }
}

/// Releases a handle returned by `imdpa_model_parse`. NULL is ignored.
///
/// # Safety
/// `model` must be a pointer previously returned by `imdpa_model_parse`
/// and not freed since, or NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_model_free(model: *mut ImdpaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of states, or zero for NULL.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_model_state_count(model: *const ImdpaModel) -> usize {
    match model.as_ref() {
        Some(m) => m.chain.n_states(),
        None => 0,
    }
}

/// Number of same-label blocks, or zero for NULL.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_model_block_count(model: *const ImdpaModel) -> usize {
    match model.as_ref() {
        Some(m) => partition_by_labels(&m.chain).n_blocks(),
        None => 0,
    }
}

/// Builds the lumped-chain abstraction with automatically chosen
/// representatives. Writes its JSON to `out_json` and, unless NULL, the
/// radius to `out_epsilon`.
///
/// # Safety
/// `model` must be a live handle; `out_json` must point to writable
/// storage for one pointer; `out_epsilon` may be NULL. The string must be
/// released with `imdpa_string_free`.
#[no_mangle]
pub unsafe extern "C" fn imdpa_standard_abstraction(
    model: *const ImdpaModel,
    out_json: *mut *mut c_char,
    out_epsilon: *mut f64,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_json.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_json must be non-NULL");
    };
    let partition = partition_by_labels(&m.chain);
    match build_standard_abstraction(&m.chain, &partition, None) {
        Ok(lumped) => {
            if let Err(s) = export_string(lumped_to_json(&lumped), out_json) {
                return s;
            }
            if !out_epsilon.is_null() {
                *out_epsilon = lumped.epsilon();
            }
            ImdpaStatus::Ok
        }
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Builds the interval-valued abstraction. Writes its JSON to `out_json`
/// and, unless NULL, the worst per-block radius to `out_xi_max`.
///
/// # Safety
/// As for `imdpa_standard_abstraction`.
#[no_mangle]
pub unsafe extern "C" fn imdpa_interval_abstraction(
    model: *const ImdpaModel,
    out_json: *mut *mut c_char,
    out_xi_max: *mut f64,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_json.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_json must be non-NULL");
    };
    let partition = partition_by_labels(&m.chain);
    match build_interval_abstraction(&m.chain, &partition) {
        Ok(imdpa) => {
            if let Err(s) = export_string(imdpa_to_json(&imdpa), out_json) {
                return s;
            }
            if !out_xi_max.is_null() {
                *out_xi_max = imdpa.xi_max();
            }
            ImdpaStatus::Ok
        }
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Builds the finitely branching abstraction whose rows are the extreme
/// points of the interval rows, and writes its JSON to `out_json`.
///
/// # Safety
/// As for `imdpa_standard_abstraction`.
#[no_mangle]
pub unsafe extern "C" fn imdpa_vertex_abstraction(
    model: *const ImdpaModel,
    out_json: *mut *mut c_char,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_json.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_json must be non-NULL");
    };
    let partition = partition_by_labels(&m.chain);
    let result = build_interval_abstraction(&m.chain, &partition)
        .and_then(|imdpa| imdpa_to_mdpa(&imdpa));
    match result {
        Ok(mdpa) => match export_string(mdpa_to_json(&mdpa), out_json) {
            Ok(()) => ImdpaStatus::Ok,
            Err(s) => s,
        },
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Evaluates a numeric query (`P=? [...]`) on the chain and writes the
/// value at `state` (or at the initial state when `state` is NULL).
///
/// # Safety
/// `model` must be a live handle; `formula` a NUL-terminated string;
/// `state` a NUL-terminated string or NULL; `out_value` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_check_value(
    model: *const ImdpaModel,
    formula: *const c_char,
    state: *const c_char,
    out_value: *mut f64,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_value.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_value must be non-NULL");
    };
    let formula = match required(formula) {
        Ok(f) => f,
        Err(s) => return s,
    };
    let state = match optional(state) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let parsed = match parse_formula(formula) {
        Ok(p) => p,
        Err(e) => return fail(ImdpaStatus::InvalidFormula, e.to_string()),
    };
    let idx = match state {
        Some(id) => match m.chain.state_index(id) {
            Ok(i) => i,
            Err(e) => return fail(ImdpaStatus::EvalFailed, e.to_string()),
        },
        None => m.chain.initial_index(),
    };
    match check_lmc(&m.chain, &parsed) {
        Ok(result) => match result.values {
            Some(values) => {
                *out_value = values[idx];
                ImdpaStatus::Ok
            }
            None => fail(
                ImdpaStatus::InvalidFormula,
                "formula yields a verdict; use imdpa_check_verdict",
            ),
        },
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Evaluates a threshold formula on the chain and writes whether `state`
/// (or the initial state) satisfies it.
///
/// # Safety
/// As for `imdpa_check_value`, with `out_sat` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_check_verdict(
    model: *const ImdpaModel,
    formula: *const c_char,
    state: *const c_char,
    out_sat: *mut bool,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_sat.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_sat must be non-NULL");
    };
    let formula = match required(formula) {
        Ok(f) => f,
        Err(s) => return s,
    };
    let state = match optional(state) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let parsed = match parse_formula(formula) {
        Ok(p) => p,
        Err(e) => return fail(ImdpaStatus::InvalidFormula, e.to_string()),
    };
    let idx = match state {
        Some(id) => match m.chain.state_index(id) {
            Ok(i) => i,
            Err(e) => return fail(ImdpaStatus::EvalFailed, e.to_string()),
        },
        None => m.chain.initial_index(),
    };
    match check_lmc(&m.chain, &parsed) {
        Ok(result) => {
            if result.values.is_some() {
                return fail(
                    ImdpaStatus::InvalidFormula,
                    "formula yields a value; use imdpa_check_value",
                );
            }
            *out_sat = result.sat_set[idx];
            ImdpaStatus::Ok
        }
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Builds the vertex quotient of the chain, evaluates a `Pmin=?` or
/// `Pmax=?` query on it, and writes the value at the initial block plus
/// the propagated error radius.
///
/// # Safety
/// `model` must be a live handle; `formula` a NUL-terminated string;
/// `out_value` non-NULL; `out_eps` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_mdpa_check(
    model: *const ImdpaModel,
    formula: *const c_char,
    out_value: *mut f64,
    out_eps: *mut f64,
) -> ImdpaStatus {
    clear_error();
    let (Some(m), false) = (model.as_ref(), out_value.is_null()) else {
        return fail(ImdpaStatus::NullArgument, "model and out_value must be non-NULL");
    };
    let formula = match required(formula) {
        Ok(f) => f,
        Err(s) => return s,
    };
    let parsed = match parse_formula(formula) {
        Ok(p) => p,
        Err(e) => return fail(ImdpaStatus::InvalidFormula, e.to_string()),
    };
    let partition = partition_by_labels(&m.chain);
    let mdpa = match build_interval_abstraction(&m.chain, &partition)
        .and_then(|imdpa| imdpa_to_mdpa(&imdpa))
    {
        Ok(mdpa) => mdpa,
        Err(e) => return fail(ImdpaStatus::EvalFailed, e.to_string()),
    };
    match check_mdpa(&mdpa, &parsed) {
        Ok(result) => match result.values {
            Some(values) => {
                *out_value = values[mdpa.initial_block()];
                if !out_eps.is_null() {
                    *out_eps = result.error_bound.map_or(0.0, |b| b.eps_k);
                }
                ImdpaStatus::Ok
            }
            None => fail(
                ImdpaStatus::InvalidFormula,
                "expected a numeric query such as Pmin=? [...]",
            ),
        },
        Err(e) => fail(ImdpaStatus::EvalFailed, e.to_string()),
    }
}

/// Message of the most recent failure on this thread, or NULL. Valid
/// until the next call into this library from the same thread.
///
/// # Safety
/// The returned pointer must not be freed or used after a further call.
#[no_mangle]
pub unsafe extern "C" fn imdpa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned in an `out_json` argument
/// and not freed since, or NULL.
#[no_mangle]
pub unsafe extern "C" fn imdpa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
