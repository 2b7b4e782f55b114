//! C ABI over the inneo graph engine.
//!
//! A store is an opaque `InneoStore*` created by [`inneo_store_new`] and
//! released with [`inneo_store_free`]. Every fallible call returns an
//! [`InneoStatus`]; on failure, [`inneo_last_error_message`] and
//! [`inneo_last_error_code`] describe the error for the calling thread.
//! Strings handed out through `char **out` parameters are owned by the
//! caller and must be released with [`inneo_string_free`]; `*out` is set to
//! null whenever a call fails.
//!
//! Handles are internally locked, so one store may be shared across threads.
//! Reads see a consistent snapshot even while another thread ingests.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::RwLock;

use inneo::prelude::*;
use inneo::service::{self, Params, ReadCall};
use inneo::Error;

/// Result of every fallible call. Values mirror the HTTP error classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InneoStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed request: unknown route, kind, parameter or weights.
    BadRequest = 3,
    /// Unknown entity or area.
    NotFound = 4,
    /// Class change, duplicate layer or name collision.
    Conflict = 5,
    /// Schema violation or unparseable input.
    Invalid = 6,
    /// Result above the response cap.
    TooLarge = 7,
    Io = 8,
    /// A bug: the call panicked. The store is left as it was before the call.
    Internal = 9,
}

/// Opaque store handle.
pub struct InneoStore {
    store: RwLock<Store>,
}

impl InneoStore {
    fn read(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { code: clean(code), message: clean(message) }));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Failure inside a call, before it is turned into a status.
enum Fail {
    Null(&'static str),
    Utf8(&'static str),
    Engine(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

fn status_of(e: &Error) -> InneoStatus {
    match e.status() {
        400 => InneoStatus::BadRequest,
        404 => InneoStatus::NotFound,
        409 => InneoStatus::Conflict,
        413 => InneoStatus::TooLarge,
        500 => InneoStatus::Io,
        _ => InneoStatus::Invalid,
    }
}

/// Run `f`, record any error for this thread and map it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> InneoStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InneoStatus::Ok,
        Ok(Err(Fail::Null(arg))) => {
            set_error("NullArgument", &format!("`{arg}` must not be null"));
            InneoStatus::NullArgument
        }
        Ok(Err(Fail::Utf8(arg))) => {
            set_error("InvalidUtf8", &format!("`{arg}` is not valid UTF-8"));
            InneoStatus::InvalidUtf8
        }
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.code(), &e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("Internal", "internal error (panic)");
            InneoStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8(name))
}

unsafe fn store_arg<'a>(p: *const InneoStore) -> Result<&'a InneoStore, Fail> {
    p.as_ref().ok_or(Fail::Null("store"))
}

unsafe fn out_arg<'a>(p: *mut *mut c_char) -> Result<&'a mut *mut c_char, Fail> {
    let out = p.as_mut().ok_or(Fail::Null("out"))?;
    *out = ptr::null_mut();
    Ok(out)
}

fn give(out: &mut *mut c_char, text: String) {
    // engine output never contains NUL: JSON and N-Triples escape it
    *out = CString::new(text).expect("no interior NUL").into_raw();
}

/// New empty store using the base schema. Never returns null.
#[no_mangle]
pub extern "C" fn inneo_store_new() -> *mut InneoStore {
    Box::into_raw(Box::new(InneoStore { store: RwLock::new(Store::default()) }))
}

/// Release a store. Null is ignored.
///
/// # Safety
/// `store` must come from [`inneo_store_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inneo_store_free(store: *mut InneoStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Register an extension layer given as a JSON layer definition.
///
/// # Safety
/// `store` must be a live handle; `layer_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn inneo_store_register_layer(
    store: *mut InneoStore,
    layer_json: *const c_char,
) -> InneoStatus {
    guard(|| {
        let handle = store_arg(store)?;
        let layer = LayerDef::from_json(str_arg(layer_json, "layer_json")?).map_err(Error::from)?;
        let mut guard = handle.write();
        let schema = guard.schema().register_layer(layer).map_err(Error::from)?;
        guard.set_schema(schema);
        Ok(())
    })
}

/// Replace the store's contents with a canonical JSONL graph. On error the
/// store is unchanged.
///
/// # Safety
/// `store` must be a live handle; `jsonl` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn inneo_store_load_jsonl(store: *mut InneoStore, jsonl: *const c_char) -> InneoStatus {
    guard(|| {
        let handle = store_arg(store)?;
        let text = str_arg(jsonl, "jsonl")?;
        let mut guard = handle.write();
        let loaded = import_jsonl(guard.schema().clone(), text).map_err(Error::from)?;
        *guard = loaded;
        Ok(())
    })
}

/// Ingest a CSV source. `kind` is one of `patents`, `articles`, `projects`,
/// `organizations`. On success `*report_out` receives the JSON ingest report.
///
/// # Safety
/// `store` must be a live handle, `kind` NUL-terminated, `data` readable for
/// `len` bytes (it may be null when `len` is 0), `report_out` writable.
#[no_mangle]
pub unsafe extern "C" fn inneo_ingest(
    store: *mut InneoStore,
    kind: *const c_char,
    data: *const u8,
    len: usize,
    report_out: *mut *mut c_char,
) -> InneoStatus {
    guard(|| {
        let out = out_arg(report_out)?;
        let handle = store_arg(store)?;
        let kind = str_arg(kind, "kind")?;
        let body: &[u8] = match (data.is_null(), len) {
            (_, 0) => &[],
            (true, _) => return Err(Fail::Null("data")),
            (false, n) => std::slice::from_raw_parts(data, n),
        };
        let (_, rendered) = service::execute_ingest(&mut handle.write(), kind, body)?;
        give(out, rendered.body);
        Ok(())
    })
}

/// Run a read given as an HTTP-style target, e.g.
/// `/query/funded-orgs?year=2000` or `/entities/org%3Aupm/neighbors`.
/// `*out` receives exactly the body the HTTP service would return.
///
/// # Safety
/// `store` must be a live handle, `target` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inneo_get(
    store: *const InneoStore,
    target: *const c_char,
    out: *mut *mut c_char,
) -> InneoStatus {
    guard(|| {
        let out = out_arg(out)?;
        let handle = store_arg(store)?;
        let target = str_arg(target, "target")?;
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        let call = ReadCall::parse(path, &Params::from_query(query))?;
        // take the snapshot, then let writers proceed
        let snapshot = handle.read().snapshot(call.as_of);
        give(out, service::execute_read(&snapshot, &call.request)?.body);
        Ok(())
    })
}

/// Explain how `src` relates to `dst`; `*out` receives the path as JSON.
///
/// # Safety
/// `store` must be a live handle, `src`/`dst` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inneo_explain_path(
    store: *const InneoStore,
    src: *const c_char,
    dst: *const c_char,
    out: *mut *mut c_char,
) -> InneoStatus {
    guard(|| {
        let out = out_arg(out)?;
        let handle = store_arg(store)?;
        let (src, dst) = (str_arg(src, "src")?, str_arg(dst, "dst")?);
        let request = service::ReadRequest::Path { src: src.to_string(), dst: dst.to_string() };
        let snapshot = handle.read().snapshot(None);
        give(out, service::execute_read(&snapshot, &request)?.body);
        Ok(())
    })
}

/// Canonical JSONL export of the current graph.
///
/// # Safety
/// `store` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inneo_export_jsonl(store: *const InneoStore, out: *mut *mut c_char) -> InneoStatus {
    guard(|| {
        let out = out_arg(out)?;
        let handle = store_arg(store)?;
        let snapshot = handle.read().snapshot(None);
        give(out, export_jsonl(&snapshot));
        Ok(())
    })
}

/// Delete an entity and its incident edges; `*out` receives
/// `{"id":…,"removed_edges":…}`.
///
/// # Safety
/// `store` must be a live handle, `id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inneo_delete_entity(
    store: *mut InneoStore,
    id: *const c_char,
    out: *mut *mut c_char,
) -> InneoStatus {
    guard(|| {
        let out = out_arg(out)?;
        let handle = store_arg(store)?;
        let id = str_arg(id, "id")?;
        give(out, service::execute_delete(&mut handle.write(), id)?.body);
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null if the last
/// call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn inneo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}

/// Stable error token (`UnknownEntity`, `SchemaViolation`, …) for the last
/// failed call on this thread, or null.
#[no_mangle]
pub extern "C" fn inneo_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// Release a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn inneo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn inneo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
