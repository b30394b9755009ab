//! C ABI over `finapprox`.
//!
//! Algebras are opaque heap handles. Every call returns an [`FaStatus`];
//! on failure the message is kept per thread and read with
//! [`fa_last_error`]. Strings handed out by the library are freed with
//! [`fa_string_free`], algebras with [`fa_algebra_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finapprox::algebra::io::{algebra_from_json, algebra_to_json};
use finapprox::algebra::{check_approximation, law_search, Entourage, FiniteAlgebra, Law};
use finapprox::padic::{build_hmn, build_kn, HmnParams};
use finapprox::pbf::{eval_finite, parse_formula, parse_region};
use finapprox::real::{build_apq, build_modular, FPParams, ModularParams};
use finapprox::scalar::parse_rational;
use finapprox::Error;

/// Opaque finite algebra.
pub struct FaAlgebra(FiniteAlgebra);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Parse = 4,
    LimitExceeded = 5,
    Malformed = 6,
    Premise = 7,
    Undecidable = 8,
    Eval = 9,
    Other = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(FaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter(_) | Error::AmbientMismatch(_) | Error::DivisionByZero => FaStatus::InvalidParameter,
            Error::Parse(_) | Error::Format(_) => FaStatus::Parse,
            Error::LimitExceeded { .. } => FaStatus::LimitExceeded,
            Error::Malformed(_) | Error::EmptyCarrier => FaStatus::Malformed,
            Error::Premise(_) => FaStatus::Premise,
            Error::Undecidable(_) => FaStatus::Undecidable,
            Error::Eval(_) => FaStatus::Eval,
        };
        Fail(status, e.to_string())
    }
}

impl From<finapprox::pbf::ParseError> for Fail {
    fn from(e: finapprox::pbf::ParseError) -> Self {
        Fail(FaStatus::Parse, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FaStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FaStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn algebra<'a>(p: *const FaAlgebra) -> Result<&'a FiniteAlgebra, Fail> {
    p.as_ref().map(|a| &a.0).ok_or_else(|| Fail(FaStatus::NullArgument, "algebra is null".into()))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FaStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_algebra(out: *mut *mut FaAlgebra, alg: FiniteAlgebra) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FaStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(Box::into_raw(Box::new(FaAlgebra(alg))));
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// The last error message on this thread, or null. Owned by the library;
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `K_n = Z/p^n Z`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fa_build_kn(p: u64, n: u32, out: *mut *mut FaAlgebra) -> FaStatus {
    guard(|| put_algebra(out, build_kn(p, n)?))
}

/// `H_{m,n}` over `Q_p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fa_build_hmn(p: u64, m: u32, n: u32, out: *mut *mut FaAlgebra) -> FaStatus {
    guard(|| put_algebra(out, build_hmn(&HmnParams::new(p, m, n)?)?))
}

/// Decimal floating point `A_PQ`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fa_build_apq(big_p: u32, big_q: u32, out: *mut *mut FaAlgebra) -> FaStatus {
    guard(|| put_algebra(out, build_apq(&FPParams::new(big_p, big_q)?)?))
}

/// Balanced modular fixed point `A'_{M, eps}`; `eps` is a rational such as
/// `"1/10"`.
///
/// # Safety
/// `eps` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fa_build_modular(m: u64, eps: *const c_char, out: *mut *mut FaAlgebra) -> FaStatus {
    guard(|| {
        let eps = parse_rational(text(eps, "eps")?)?;
        put_algebra(out, build_modular(&ModularParams::new(m, eps)?)?)
    })
}

/// Read an algebra from its JSON file format.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_from_json(json: *const c_char, out: *mut *mut FaAlgebra) -> FaStatus {
    guard(|| put_algebra(out, algebra_from_json(text(json, "json")?)?))
}

/// Write an algebra in its JSON file format; free the result with
/// [`fa_string_free`].
///
/// # Safety
/// `alg` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_to_json(alg: *const FaAlgebra, out: *mut *mut c_char) -> FaStatus {
    guard(|| {
        let s = algebra_to_json(algebra(alg)?)?;
        put(out, c_string(s))
    })
}

/// Number of carrier elements.
///
/// # Safety
/// `alg` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_size(alg: *const FaAlgebra, out: *mut usize) -> FaStatus {
    guard(|| put(out, algebra(alg)?.size()))
}

/// Decide whether `alg` is a `(C, W)`-approximation. `region` uses the
/// formula-bound syntax (`[-1, 1]`, `pball(2, 0)`, unions with `|`); `eps`
/// is the entourage radius. Writes 1 or 0 to `holds`.
///
/// # Safety
/// Strings must be nul-terminated, `alg` from this library, `holds` writable.
#[no_mangle]
pub unsafe extern "C" fn fa_check_approximation(
    alg: *const FaAlgebra,
    region: *const c_char,
    eps: *const c_char,
    holds: *mut i32,
) -> FaStatus {
    guard(|| {
        let alg = algebra(alg)?;
        let c = parse_region(text(region, "region")?)?;
        let w = Entourage::new(parse_rational(text(eps, "eps")?)?)?;
        let r = check_approximation(alg, &c, &w)?;
        put(holds, r.ok() as i32)
    })
}

/// Search for a violation of `law` (`assoc-add`, `comm-mul`, `distrib`,
/// `cancel-add`, …). Writes a JSON witness to `witness`, or null when the
/// law holds exhaustively.
///
/// # Safety
/// `law` must be nul-terminated, `alg` from this library, `witness` writable.
#[no_mangle]
pub unsafe extern "C" fn fa_law_search(alg: *const FaAlgebra, law: *const c_char, witness: *mut *mut c_char) -> FaStatus {
    guard(|| {
        let alg = algebra(alg)?;
        let law: Law = text(law, "law")?.parse()?;
        let w = law_search(alg, &law, None)?;
        put(witness, w.map_or(ptr::null_mut(), |w| c_string(serde_json::to_string(&w).expect("witness serializes"))))
    })
}

/// Evaluate a positive bounded formula. `assignment` is `name=value` pairs
/// separated by commas (may be empty or null); each value maps to the
/// nearest carrier element. Writes 1 or 0 to `value`.
///
/// # Safety
/// Strings must be nul-terminated (or `assignment` null), `alg` from this
/// library, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn fa_eval(
    alg: *const FaAlgebra,
    formula: *const c_char,
    assignment: *const c_char,
    value: *mut i32,
) -> FaStatus {
    guard(|| {
        let alg = algebra(alg)?;
        let phi = parse_formula(text(formula, "formula")?)?;
        let mut ids = BTreeMap::new();
        if !assignment.is_null() {
            for item in text(assignment, "assignment")?.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| Fail(FaStatus::InvalidParameter, format!("{item:?} is not name=value")))?;
                let x = parse_rational(v.trim())?;
                let id = alg.embedding().nearest(&x).ok_or(Error::EmptyCarrier)?;
                ids.insert(k.trim().to_string(), id);
            }
        }
        let out = eval_finite(&phi, alg, &ids)?;
        put(value, out.value as i32)
    })
}

/// # Safety
/// `alg` must come from this library (or be null) and not be used after.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_free(alg: *mut FaAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// # Safety
/// `s` must come from this library (or be null) and not be used after.
#[no_mangle]
pub unsafe extern "C" fn fa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
