//! C interface. Fields are opaque handles; every call returns a status
//! code and writes results through out-pointers. Strings handed out by the
//! library must be released with `humbert_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use humbert_core::byformula::predicted_tally;
use humbert_core::cmfield::CMField;
use humbert_core::embedcount::{embedding_count, embedding_tally};
use humbert_core::exactmath::int::is_prime;
use humbert_core::fixtures;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HumbertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownField = 3,
    InvalidField = 4,
    InvalidArgument = 5,
    Computation = 6,
    Panic = 7,
}

/// Opaque handle to a validated quartic CM field.
pub struct HumbertField {
    inner: CMField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (HumbertStatus, String)>) -> HumbertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HumbertStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HumbertStatus::Panic
        }
    }
}

unsafe fn field_ref<'a>(f: *const HumbertField) -> Result<&'a CMField, (HumbertStatus, String)> {
    f.as_ref().map(|h| &h.inner).ok_or((HumbertStatus::NullPointer, "field handle is null".into()))
}

fn check_out<T>(out: *mut T) -> Result<(), (HumbertStatus, String)> {
    if out.is_null() {
        Err((HumbertStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Look up a bundled fixture such as "dt29".
///
/// # Safety
/// `name` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_field_from_fixture(name: *const c_char, out: *mut *mut HumbertField) -> HumbertStatus {
    guard(|| {
        check_out(out)?;
        if name.is_null() {
            return Err((HumbertStatus::NullPointer, "name is null".into()));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|e| (HumbertStatus::InvalidUtf8, e.to_string()))?;
        let fx = fixtures::by_name(name).ok_or((HumbertStatus::UnknownField, format!("unknown field {name:?}")))?;
        let inner = fx.field().map_err(|e| (HumbertStatus::InvalidField, e.to_string()))?;
        *out = Box::into_raw(Box::new(HumbertField { inner }));
        Ok(())
    })
}

/// Build a field from eta^2 - (alpha0 + alpha1 w) eta + (beta0 + beta1 w) = 0
/// over Q(sqrt d).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_field_from_generators(
    d: i64,
    alpha0: i64,
    alpha1: i64,
    beta0: i64,
    beta1: i64,
    out: *mut *mut HumbertField,
) -> HumbertStatus {
    guard(|| {
        check_out(out)?;
        let inner = CMField::from_generators(d.into(), alpha0.into(), alpha1.into(), beta0.into(), beta1.into())
            .map_err(|e| (HumbertStatus::InvalidField, e.to_string()))?;
        *out = Box::into_raw(Box::new(HumbertField { inner }));
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn humbert_field_free(field: *mut HumbertField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Discriminant D of the real quadratic subfield and the norm D~ of the
/// relative discriminant.
///
/// # Safety
/// `field` must be a live handle; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_field_invariants(
    field: *const HumbertField,
    disc: *mut i64,
    dtilde: *mut i64,
) -> HumbertStatus {
    guard(|| {
        let k = field_ref(field)?;
        check_out(disc)?;
        check_out(dtilde)?;
        let conv = |x: i128| i64::try_from(x).map_err(|_| (HumbertStatus::Computation, "value exceeds 64 bits".into()));
        *disc = conv(k.disc())?;
        *dtilde = conv(k.dtilde())?;
        Ok(())
    })
}

/// The Bruinier-Yang tally as JSON, e.g. {"5":"2"}.
///
/// # Safety
/// `field` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_by_tally_json(
    field: *const HumbertField,
    max_prime: i64,
    correction_mod16: bool,
    out_json: *mut *mut c_char,
) -> HumbertStatus {
    guard(|| {
        let k = field_ref(field)?;
        check_out(out_json)?;
        if max_prime < 2 {
            return Err((HumbertStatus::InvalidArgument, "max_prime must be at least 2".into()));
        }
        let r = predicted_tally(k, max_prime.into(), correction_mod16);
        let s = serde_json::to_string(&r.tally).map_err(|e| (HumbertStatus::Computation, e.to_string()))?;
        *out_json = into_c_string(s);
        Ok(())
    })
}

/// Number of embeddings up to isomorphism at the prime p.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_embedding_count(field: *const HumbertField, p: i64, out: *mut u64) -> HumbertStatus {
    guard(|| {
        let k = field_ref(field)?;
        check_out(out)?;
        if !is_prime(p.into()) {
            return Err((HumbertStatus::InvalidArgument, format!("{p} is not prime")));
        }
        *out = embedding_count(k, p.into()).map_err(|e| (HumbertStatus::Computation, e.to_string()))?;
        Ok(())
    })
}

/// Embedding counts for every prime up to `max_prime`, as JSON.
///
/// # Safety
/// `field` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn humbert_embedding_tally_json(
    field: *const HumbertField,
    max_prime: i64,
    out_json: *mut *mut c_char,
) -> HumbertStatus {
    guard(|| {
        let k = field_ref(field)?;
        check_out(out_json)?;
        if max_prime < 2 {
            return Err((HumbertStatus::InvalidArgument, "max_prime must be at least 2".into()));
        }
        let t = embedding_tally(k, max_prime.into()).map_err(|e| (HumbertStatus::Computation, e.to_string()))?;
        let s = serde_json::to_string(&t).map_err(|e| (HumbertStatus::Computation, e.to_string()))?;
        *out_json = into_c_string(s);
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn humbert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the most recent failure on this thread, or null. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn humbert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn humbert_status_str(status: HumbertStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HumbertStatus::Ok => c"ok",
        HumbertStatus::NullPointer => c"null pointer",
        HumbertStatus::InvalidUtf8 => c"invalid UTF-8",
        HumbertStatus::UnknownField => c"unknown field",
        HumbertStatus::InvalidField => c"invalid field",
        HumbertStatus::InvalidArgument => c"invalid argument",
        HumbertStatus::Computation => c"computation failed",
        HumbertStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
