//! C ABI over `bp_core`.
//!
//! Structures and models are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`BpStatus`]; on failure
//! [`bp_last_error_message`] describes the error for the calling thread.
//! Index vectors are written into caller-provided `double` buffers.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bp_core::cli::{cmd_analyze, AnalyzeFlags};
use bp_core::indices::{self, IndexVector};
use bp_core::lifetimes::{EvalOptions, JointLifetimeModel, Method};
use bp_core::spec::{model_from_json, SystemSpec};
use bp_core::structure::{StandardKind, StructureFunction};
use bp_core::Error;
use libc::{c_char, c_double, size_t};

/// Opaque structure function.
pub struct BpStructure(StructureFunction);

/// Opaque joint lifetime model.
pub struct BpModel(JointLifetimeModel);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    NotSemicoherent = 4,
    TooManyComponents = 5,
    ComponentMismatch = 6,
    MethodUnavailable = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    NotADistribution = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpMethod {
    Auto = 0,
    Exact = 1,
    Quadrature = 2,
    ClosedForm = 3,
    MonteCarlo = 4,
}

impl From<BpMethod> for Method {
    fn from(m: BpMethod) -> Self {
        match m {
            BpMethod::Auto => Method::Auto,
            BpMethod::Exact => Method::Exact,
            BpMethod::Quadrature => Method::Quadrature,
            BpMethod::ClosedForm => Method::ClosedForm,
            BpMethod::MonteCarlo => Method::MonteCarlo,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> BpStatus {
    match e {
        Error::Parse { .. } | Error::UnknownVariable { .. } | Error::Spec { .. } => BpStatus::ParseError,
        Error::NotSemicoherent { .. } => BpStatus::NotSemicoherent,
        Error::TooManyComponents { .. } => BpStatus::TooManyComponents,
        Error::ComponentMismatch { .. } => BpStatus::ComponentMismatch,
        Error::MethodUnavailable { .. } => BpStatus::MethodUnavailable,
        Error::NotADistribution(_) => BpStatus::NotADistribution,
        e if e.is_numerical() => BpStatus::Numerical,
        _ => BpStatus::InvalidArgument,
    }
}

struct Failure(BpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BpStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, recording any error or panic for [`bp_last_error_message`].
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BpStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_vector(values: &[f64], out: *mut c_double, len: size_t) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        return Err(Failure(
            BpStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a formula such as `"x1*x4 | x2*x5"` over `n` components.
///
/// # Safety
/// `formula` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_structure_from_formula(
    formula: *const c_char,
    n: size_t,
    out: *mut *mut BpStructure,
) -> BpStatus {
    guard(|| {
        let phi = StructureFunction::parse_formula(text(formula, "formula")?, n)?;
        write_handle(out, BpStructure(phi))
    })
}

/// Builds a structure from `2^n` bytes, entry `A` nonzero iff `φ(A) = 1`.
///
/// # Safety
/// `table` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_structure_from_truth_table(
    table: *const u8,
    len: size_t,
    n: size_t,
    out: *mut *mut BpStructure,
) -> BpStatus {
    guard(|| {
        if table.is_null() {
            return Err(null("table"));
        }
        let bits: Vec<bool> = std::slice::from_raw_parts(table, len).iter().map(|&b| b != 0).collect();
        let phi = StructureFunction::from_truth_table(n, &bits)?;
        write_handle(out, BpStructure(phi))
    })
}

/// `kind` is `"series"`, `"parallel"`, `"bridge"` or `"k_out_of_n"`; `k` is
/// read only for the last.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_structure_standard(
    kind: *const c_char,
    k: size_t,
    n: size_t,
    out: *mut *mut BpStructure,
) -> BpStatus {
    guard(|| {
        let kind = match text(kind, "kind")? {
            "k_out_of_n" => StandardKind::KOutOfN(k),
            other => other.parse()?,
        };
        write_handle(out, BpStructure(StructureFunction::make_standard(kind, n)?))
    })
}

/// Number of components, or 0 for a null handle.
///
/// # Safety
/// `phi` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_structure_n(phi: *const BpStructure) -> size_t {
    phi.as_ref().map_or(0, |p| p.0.n())
}

/// # Safety
/// `phi` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bp_structure_free(phi: *mut BpStructure) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_model_exchangeable(n: size_t, out: *mut *mut BpModel) -> BpStatus {
    guard(|| write_handle(out, BpModel(JointLifetimeModel::exchangeable(n)?)))
}

/// Independent Weibull lifetimes with scales `lambdas[0..n]` and common
/// shape `alpha`.
///
/// # Safety
/// `lambdas` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_model_weibull(
    lambdas: *const c_double,
    n: size_t,
    alpha: c_double,
    out: *mut *mut BpModel,
) -> BpStatus {
    guard(|| {
        if lambdas.is_null() {
            return Err(null("lambdas"));
        }
        let lambdas = std::slice::from_raw_parts(lambdas, n).to_vec();
        write_handle(out, BpModel(JointLifetimeModel::weibull(lambdas, alpha)?))
    })
}

/// Model from a JSON model block, e.g.
/// `{"model": "order_distribution", "probs": {"12": "1/3", "21": "2/3"}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_model_from_json(json: *const c_char, n: size_t, out: *mut *mut BpModel) -> BpStatus {
    guard(|| write_handle(out, BpModel(model_from_json(text(json, "json")?, n)?)))
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bp_model_free(model: *mut BpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

type Index = fn(&StructureFunction, &JointLifetimeModel, &EvalOptions) -> bp_core::Result<IndexVector>;

unsafe fn model_index(
    f: Index,
    phi: *const BpStructure,
    model: *const BpModel,
    method: BpMethod,
    out: *mut c_double,
    len: size_t,
) -> BpStatus {
    guard(|| {
        let phi = deref(phi, "phi")?;
        let model = deref(model, "model")?;
        let v = f(&phi.0, &model.0, &EvalOptions::with_method(method.into()))?;
        write_vector(&v.to_f64(), out, len)
    })
}

/// Writes `I_BP` (n values).
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_barlow_proschan(
    phi: *const BpStructure,
    model: *const BpModel,
    method: BpMethod,
    out: *mut c_double,
    len: size_t,
) -> BpStatus {
    model_index(indices::barlow_proschan, phi, model, method, out, len)
}

/// Writes the signature `p` (n values).
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_signature(
    phi: *const BpStructure,
    model: *const BpModel,
    method: BpMethod,
    out: *mut c_double,
    len: size_t,
) -> BpStatus {
    model_index(indices::signature_p, phi, model, method, out, len)
}

/// Writes `Pr(T > X_{k:n})` for `k = 0..=n` (n + 1 values).
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_tail_signature(
    phi: *const BpStructure,
    model: *const BpModel,
    method: BpMethod,
    out: *mut c_double,
    len: size_t,
) -> BpStatus {
    model_index(indices::tail_signature, phi, model, method, out, len)
}

/// Writes the Shapley-Shubik value `b` (n values).
///
/// # Safety
/// `phi` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_structural_b(phi: *const BpStructure, out: *mut c_double, len: size_t) -> BpStatus {
    guard(|| write_vector(&indices::structural_b(&deref(phi, "phi")?.0).to_f64(), out, len))
}

/// Writes the structural signature `s` (n values).
///
/// # Safety
/// `phi` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_structural_signature(phi: *const BpStructure, out: *mut c_double, len: size_t) -> BpStatus {
    guard(|| write_vector(&indices::structural_signature(&deref(phi, "phi")?.0).to_f64(), out, len))
}

/// Normalized Shannon entropy of `w[0..len]`.
///
/// # Safety
/// `w` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_symmetry_index(w: *const c_double, len: size_t, out: *mut c_double) -> BpStatus {
    guard(|| {
        if w.is_null() {
            return Err(null("w"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = indices::symmetry_index_of(std::slice::from_raw_parts(w, len), 0.0)?;
        Ok(())
    })
}

/// Runs a full analysis of a system-spec document and returns the JSON
/// report in `*out`; release it with [`bp_string_free`].
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_analyze_json(spec_json: *const c_char, out: *mut *mut c_char) -> BpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = SystemSpec::from_json(text(spec_json, "spec_json")?)?;
        let report = cmd_analyze(&spec, &AnalyzeFlags::default())?.to_json();
        *out = CString::new(report)
            .map_err(|_| Failure(BpStatus::InvalidArgument, "report contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
