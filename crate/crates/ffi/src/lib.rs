//! C ABI for loading scenes, running tool sessions and scoring answers.
//!
//! Scenes and sessions are opaque heap handles released with their `_free`
//! function. Strings returned through out-pointers are owned by the caller
//! and released with `sg_string_free`. On failure a function returns a
//! non-zero `SgStatus` and `sg_last_error` describes the cause for the
//! calling thread.
//!
//! A session must not be used from two threads at once. Scenes are
//! immutable and may be shared by any number of sessions.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use sgtools::evaluator::score_numeric;
use sgtools::ingestion::{load_scene, load_scene_str, IngestError};
use sgtools::tool_server::Session;
use sgtools::toolbox::scene_context;
use sgtools::SceneGraph;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidScene = 5,
    ToolError = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Loaded, validated scene graph.
pub struct SgScene {
    graph: Arc<SceneGraph>,
}

/// Tool session bound to one scene, with its call trace.
pub struct SgSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SgStatus, msg: impl Into<String>) -> SgStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `SgStatus::Panic`.
fn guard(f: impl FnOnce() -> SgStatus) -> SgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SgStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, SgStatus> {
    if p.is_null() {
        return Err(fail(SgStatus::NullArgument, format!("'{name}' is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SgStatus::InvalidUtf8, format!("'{name}' is not valid UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> SgStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            SgStatus::Ok
        }
        Err(_) => fail(SgStatus::InvalidArgument, "result contains a NUL byte"),
    }
}

fn ingest_status(e: &IngestError) -> SgStatus {
    match e {
        IngestError::Io { .. } => SgStatus::Io,
        IngestError::Parse(_) => SgStatus::Parse,
        _ => SgStatus::InvalidScene,
    }
}

unsafe fn finish_load(result: Result<SceneGraph, IngestError>, out: *mut *mut SgScene) -> SgStatus {
    match result {
        Ok(graph) => {
            *out = Box::into_raw(Box::new(SgScene { graph: Arc::new(graph) }));
            SgStatus::Ok
        }
        Err(e) => fail(ingest_status(&e), e.to_string()),
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a scene file.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_load(path: *const c_char, out: *mut *mut SgScene) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return fail(SgStatus::NullArgument, "'out' is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        finish_load(load_scene(path), out)
    })
}

/// Loads and validates a scene from JSON text.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_load_json(json: *const c_char, out: *mut *mut SgScene) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return fail(SgStatus::NullArgument, "'out' is null");
        }
        let json = match str_arg(json, "json") {
            Ok(j) => j,
            Err(s) => return s,
        };
        finish_load(load_scene_str(json), out)
    })
}

/// Releases a scene. Sessions created from it stay valid. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_free(scene: *mut SgScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of structural violations (0 for any scene this library loaded).
#[no_mangle]
pub unsafe extern "C" fn sg_scene_validate(scene: *const SgScene, out_violations: *mut usize) -> SgStatus {
    guard(|| {
        if scene.is_null() || out_violations.is_null() {
            return fail(SgStatus::NullArgument, "'scene' or 'out_violations' is null");
        }
        *out_violations = (*scene).graph.validate().len();
        SgStatus::Ok
    })
}

/// Scene context table as text.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_context(scene: *const SgScene, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        if scene.is_null() || out.is_null() {
            return fail(SgStatus::NullArgument, "'scene' or 'out' is null");
        }
        write_string(out, scene_context(&(*scene).graph).text)
    })
}

/// Opens a session bound to `scene` under the id `scene_id`.
#[no_mangle]
pub unsafe extern "C" fn sg_session_new(scene: *const SgScene, scene_id: *const c_char, out: *mut *mut SgSession) -> SgStatus {
    guard(|| {
        if scene.is_null() || out.is_null() {
            return fail(SgStatus::NullArgument, "'scene' or 'out' is null");
        }
        let id = match str_arg(scene_id, "scene_id") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let inner = Session::with_scene(id, (*scene).graph.clone());
        *out = Box::into_raw(Box::new(SgSession { inner }));
        SgStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_session_free(session: *mut SgSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Calls a tool with JSON arguments. On success `*out_json` holds the
/// result; on `SG_STATUS_TOOL_ERROR` it holds `{"code", "message"}`.
#[no_mangle]
pub unsafe extern "C" fn sg_session_call(
    session: *mut SgSession,
    tool: *const c_char,
    args_json: *const c_char,
    out_json: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        if session.is_null() || out_json.is_null() {
            return fail(SgStatus::NullArgument, "'session' or 'out_json' is null");
        }
        let tool = match str_arg(tool, "tool") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let args = if args_json.is_null() {
            serde_json::Value::Null
        } else {
            let text = match str_arg(args_json, "args_json") {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(v) => v,
                Err(e) => return fail(SgStatus::InvalidArgument, format!("args_json: {e}")),
            }
        };
        match (*session).inner.call_tool(tool, &args) {
            Ok(v) => write_string(out_json, v.to_string()),
            Err(e) => {
                let msg = format!("{}: {}", e.code.as_str(), e.message);
                let body = serde_json::to_string(&e).expect("tool error serializes");
                let _ = write_string(out_json, body);
                fail(SgStatus::ToolError, msg)
            }
        }
    })
}

/// Handles one protocol request line and returns the response line.
/// Protocol-level failures are reported inside the response, not as status.
#[no_mangle]
pub unsafe extern "C" fn sg_session_handle_line(session: *mut SgSession, line: *const c_char, out_line: *mut *mut c_char) -> SgStatus {
    guard(|| {
        if session.is_null() || out_line.is_null() {
            return fail(SgStatus::NullArgument, "'session' or 'out_line' is null");
        }
        let line = match str_arg(line, "line") {
            Ok(l) => l,
            Err(s) => return s,
        };
        write_string(out_line, (*session).inner.handle_line(line))
    })
}

/// Call trace so far as a JSON array of entries.
#[no_mangle]
pub unsafe extern "C" fn sg_session_trace(session: *const SgSession, out_json: *mut *mut c_char) -> SgStatus {
    guard(|| {
        if session.is_null() || out_json.is_null() {
            return fail(SgStatus::NullArgument, "'session' or 'out_json' is null");
        }
        let text = serde_json::to_string((*session).inner.trace()).expect("trace serializes");
        write_string(out_json, text)
    })
}

/// Releases a string returned by this library. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Mean relative accuracy of `pred` against a positive `gt`.
#[no_mangle]
pub unsafe extern "C" fn sg_score_numeric(pred: f64, gt: f64, out_score: *mut f64) -> SgStatus {
    guard(|| {
        if out_score.is_null() {
            return fail(SgStatus::NullArgument, "'out_score' is null");
        }
        match score_numeric(pred, gt) {
            Ok(s) => {
                *out_score = s;
                SgStatus::Ok
            }
            Err(e) => fail(SgStatus::InvalidArgument, e.to_string()),
        }
    })
}
