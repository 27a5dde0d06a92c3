use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sgtools_ffi::*;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/kitchen_scene.json")
}

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { sg_string_free(s) };
    out
}

fn load() -> *mut SgScene {
    let path = CString::new(fixture().to_str().unwrap()).unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { sg_scene_load(path.as_ptr(), &mut scene) }, SgStatus::Ok);
    scene
}

#[test]
fn scene_context_and_validation() {
    let scene = load();
    let mut n = usize::MAX;
    assert_eq!(unsafe { sg_scene_validate(scene, &mut n) }, SgStatus::Ok);
    assert_eq!(n, 0);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { sg_scene_context(scene, &mut text) }, SgStatus::Ok);
    assert!(take(text).contains("cabinet (16)"));
    unsafe { sg_scene_free(scene) };
}

#[test]
fn session_calls_and_trace() {
    let scene = load();
    let id = CString::new("kitchen").unwrap();
    let mut session = ptr::null_mut();
    assert_eq!(unsafe { sg_session_new(scene, id.as_ptr(), &mut session) }, SgStatus::Ok);
    // The session keeps the scene alive on its own.
    unsafe { sg_scene_free(scene) };

    let tool = CString::new("sg_search").unwrap();
    let args = CString::new(r#"{"query":"cabinets"}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_session_call(session, tool.as_ptr(), args.as_ptr(), &mut out) }, SgStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 16);

    let bad = CString::new("geom_get_volume").unwrap();
    let args = CString::new(r#"{"id":"Piano-0"}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_session_call(session, bad.as_ptr(), args.as_ptr(), &mut out) }, SgStatus::ToolError);
    let e: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(e["code"], "NodeNotFound");
    let msg = unsafe { CStr::from_ptr(sg_last_error()) }.to_str().unwrap();
    assert!(msg.starts_with("NodeNotFound"));

    let line = CString::new(r#"{"id":7,"method":"list_tools","params":{}}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_session_handle_line(session, line.as_ptr(), &mut out) }, SgStatus::Ok);
    let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!((r["id"].as_i64(), r["ok"].as_bool()), (Some(7), Some(true)));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_session_trace(session, &mut out) }, SgStatus::Ok);
    let t: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(t.as_array().unwrap().len(), 2);
    unsafe { sg_session_free(session) };
}

#[test]
fn error_codes() {
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { sg_scene_load(ptr::null(), &mut scene) }, SgStatus::NullArgument);
    let missing = CString::new("/nonexistent/scene.json").unwrap();
    assert_eq!(unsafe { sg_scene_load(missing.as_ptr(), &mut scene) }, SgStatus::Io);
    assert!(!sg_last_error().is_null());
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { sg_scene_load_json(junk.as_ptr(), &mut scene) }, SgStatus::Parse);
    let unknown = CString::new(r#"{"schema_version":"1.0","building":{"class_label":"x"},"floors":[],"rooms":[],"objects":[{"class_label":"dragon","obb":{"center":[0,0,0],"half_extents":[1,1,1],"yaw":0}}]}"#).unwrap();
    assert_eq!(unsafe { sg_scene_load_json(unknown.as_ptr(), &mut scene) }, SgStatus::InvalidScene);
    assert!(scene.is_null());
    let bytes = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { sg_scene_load_json(bytes.as_ptr().cast(), &mut scene) }, SgStatus::InvalidUtf8);

    let mut s = 0.0;
    assert_eq!(unsafe { sg_score_numeric(9.0, 10.0, &mut s) }, SgStatus::Ok);
    assert_eq!(s, 0.8);
    assert_eq!(unsafe { sg_score_numeric(1.0, 0.0, &mut s) }, SgStatus::InvalidArgument);
    assert_eq!(unsafe { sg_score_numeric(1.0, 1.0, ptr::null_mut()) }, SgStatus::NullArgument);
    unsafe {
        sg_scene_free(ptr::null_mut());
        sg_session_free(ptr::null_mut());
        sg_string_free(ptr::null_mut());
    }
    assert!(!sg_version().is_null());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sgtools.h")
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_compiles_as_c() {
    if !have_cc() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(header())
        .status()
        .unwrap();
    assert!(status.success());
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "sgtools.h"

int main(int argc, char **argv) {
    SgScene *scene = NULL;
    if (sg_scene_load(argv[1], &scene) != SG_STATUS_OK) { fprintf(stderr, "%s\n", sg_last_error()); return 1; }
    SgSession *session = NULL;
    if (sg_session_new(scene, "kitchen", &session) != SG_STATUS_OK) return 2;
    char *out = NULL;
    if (sg_session_call(session, "geom_distance", "{\"a\":\"Sofa-0\",\"b\":\"Tv Monitor-0\"}", &out) != SG_STATUS_OK) return 3;
    int ok = strstr(out, "\"distance\"") != NULL;
    sg_string_free(out);
    sg_session_free(session);
    sg_scene_free(scene);
    double s = 0.0;
    if (sg_score_numeric(9.0, 10.0, &s) != SG_STATUS_OK || s != 0.8) return 4;
    printf("ok\n");
    return ok ? 0 : 5;
}
"#;

#[test]
fn c_program_links_against_staticlib() {
    // deps/<test-exe> -> the profile directory holding libsgtools_ffi.a
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libsgtools_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("no C compiler or static library at {}; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).arg(fixture()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
