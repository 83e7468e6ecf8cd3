//! C ABI over `fraisse-core`.
//!
//! Every function returns an [`FrStatus`]; results come back through out
//! pointers. On failure, [`fr_last_error`] describes the error for the
//! calling thread. Strings returned by the library are freed with
//! [`fr_string_free`], structures with [`fr_structure_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use fraisse_core::canon::isomorphic;
use fraisse_core::config::{resolve_class, Config};
use fraisse_core::embedding::enumerate_embeddings;
use fraisse_core::harness;
use fraisse_core::{Error, FinStructure};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque finite structure.
pub struct FrStructure(Arc<FinStructure>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(FrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => FrStatus::Parse,
            Error::Io(_) => FrStatus::Io,
            _ => FrStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FrStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FrStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(FrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn structure<'a>(p: *const FrStructure, what: &str) -> Result<&'a Arc<FinStructure>, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure(FrStatus::InvalidInput, "output contains NUL".into()))
}

/// Message for the last failing call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a structure in the text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_parse(text: *const c_char, out: *mut *mut FrStructure) -> FrStatus {
    guard(|| {
        let s: FinStructure = read_str(text, "text")?.parse()?;
        write(out, Box::into_raw(Box::new(FrStructure(Arc::new(s)))), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_free(s: *mut FrStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_size(s: *const FrStructure, out: *mut usize) -> FrStatus {
    guard(|| write(out, structure(s, "s")?.size(), "out"))
}

/// Text form of `s`; free with `fr_string_free`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_to_text(s: *const FrStructure, out: *mut *mut c_char) -> FrStatus {
    guard(|| write(out, c_string(structure(s, "s")?.to_string())?, "out"))
}

/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_isomorphic(a: *const FrStructure, b: *const FrStructure, out: *mut bool) -> FrStatus {
    guard(|| write(out, isomorphic(structure(a, "a")?, structure(b, "b")?), "out"))
}

/// Disjoint union of `a` and `b` with no relations between them.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_free_join(
    a: *const FrStructure,
    b: *const FrStructure,
    out: *mut *mut FrStructure,
) -> FrStatus {
    guard(|| {
        let joined = structure(a, "a")?.free_join(structure(b, "b")?)?;
        write(out, Box::into_raw(Box::new(FrStructure(Arc::new(joined)))), "out")
    })
}

/// Number of embeddings of `pattern` into `host`.
///
/// # Safety
/// `host` and `pattern` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_count_embeddings(
    host: *const FrStructure,
    pattern: *const FrStructure,
    out: *mut usize,
) -> FrStatus {
    guard(|| {
        let (host, pattern) = (structure(host, "host")?, structure(pattern, "pattern")?);
        if host.signature() != pattern.signature() {
            return Err(Error::SignatureMismatch.into());
        }
        write(out, enumerate_embeddings(host, pattern).len(), "out")
    })
}

/// Class-property report as JSON. `class` is a builtin class name or a
/// path to a class file.
///
/// # Safety
/// `class` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_check_class_json(class: *const c_char, max_size: usize, out: *mut *mut c_char) -> FrStatus {
    guard(|| {
        let spec = resolve_class(read_str(class, "class")?, Path::new("."))?;
        let run = harness::run_check_class(&spec, max_size, 0)?;
        write(out, c_string(run.report.to_json()?)?, "out")
    })
}

/// Runs a `[null-witness]` config and returns the report as JSON.
/// `negative` (optional) is set when the outcome is insufficient copies.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable;
/// `negative` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fr_null_witness_json(
    config: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
    negative: *mut bool,
) -> FrStatus {
    guard(|| {
        let cfg = Config::parse(read_str(config, "config")?, Path::new("."))?;
        let run = harness::run_null_witness(&cfg, seed)?;
        let json = c_string(run.report.to_json()?)?;
        if !negative.is_null() {
            negative.write(run.negative);
        }
        write(out, json, "out")
    })
}
