use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use nscert_ffi::*;

fn last_error() -> String {
    let p = nscert_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pr_box_round_trip_and_vertex() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(nscert_box_pr(&mut b), NscertStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nscert_box_to_json(b, &mut json), NscertStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(nscert_box_from_json(json, &mut back), NscertStatus::Ok);
        nscert_string_free(json);

        let (mut is_vertex, mut rank) = (false, 0usize);
        assert_eq!(nscert_vertex_check(back, &mut is_vertex, &mut rank), NscertStatus::Ok);
        assert!(is_vertex);
        assert_eq!(rank, 16);

        let (mut local, mut value, mut bound) = (true, 0.0, 0.0);
        assert_eq!(nscert_local_check(back, &mut local, &mut value, &mut bound), NscertStatus::Ok);
        assert!(!local);
        assert!(value > bound);

        nscert_box_free(b);
        nscert_box_free(back);
    }
}

#[test]
fn theta_rejects_pr_box() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(nscert_box_pr(&mut b), NscertStatus::Ok);
        let (mut status, mut residual) = (NscertTheta::Feasible, 0.0);
        assert_eq!(nscert_theta_check(b, 0.0, 0, &mut status, &mut residual), NscertStatus::Ok);
        assert_eq!(status, NscertTheta::Infeasible);
        assert!(residual >= 1e-3);
        nscert_box_free(b);
    }
}

#[test]
fn ghz_functional() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(nscert_assemblage_ghz(&mut s), NscertStatus::Ok);
        let mut valid = false;
        assert_eq!(nscert_assemblage_validate(s, &mut valid), NscertStatus::Ok);
        assert!(valid);
        let (mut structural, mut unique) = (false, false);
        assert_eq!(nscert_assemblage_inflexible(s, &mut structural, &mut unique), NscertStatus::Ok);
        assert!(structural && unique);
        let mut f = ptr::null_mut();
        assert_eq!(nscert_functional_build(s, &mut f), NscertStatus::Ok);
        let (mut value, mut bound) = (0.0, 0.0);
        assert_eq!(nscert_functional_evaluate(f, s, &mut value), NscertStatus::Ok);
        assert_eq!(nscert_functional_lhs_bound(f, &mut bound), NscertStatus::Ok);
        assert!((value - 4.0).abs() < 1e-12);
        assert!((bound - (4.0 + 10f64.sqrt()) / 2.0).abs() < 1e-9);

        let mut json = ptr::null_mut();
        assert_eq!(nscert_assemblage_to_json(s, &mut json), NscertStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(nscert_assemblage_from_json(json, &mut back), NscertStatus::Ok);
        nscert_string_free(json);
        nscert_assemblage_free(back);
        nscert_functional_free(f);
        nscert_assemblage_free(s);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let bad = CString::new("{").unwrap();
        let mut b = ptr::null_mut();
        assert_eq!(nscert_box_from_json(bad.as_ptr(), &mut b), NscertStatus::Schema);
        assert!(b.is_null());
        assert!(last_error().contains("schema"));

        assert_eq!(nscert_box_from_json(ptr::null(), &mut b), NscertStatus::NullPointer);
        assert!(last_error().contains("json"));

        let mut pr = ptr::null_mut();
        assert_eq!(nscert_box_pr(&mut pr), NscertStatus::Ok);
        assert!(nscert_last_error().is_null());
        let mut rank = 0usize;
        assert_eq!(nscert_vertex_check(pr, ptr::null_mut(), &mut rank), NscertStatus::NullPointer);
        nscert_box_free(pr);

        nscert_box_free(ptr::null_mut());
        nscert_string_free(ptr::null_mut());
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(nscert_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nscert.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "nscert_last_error",
        "nscert_box_from_json",
        "nscert_box_free",
        "nscert_theta_check",
        "nscert_functional_lhs_bound",
        "NSCERT_STATUS_SCHEMA",
        "typedef struct NscertBox NscertBox",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-Wall", "-Werror"])
        .arg(&header)
        .status()
    else {
        return;
    };
    assert!(status.success());
}
