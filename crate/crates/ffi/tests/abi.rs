use std::ffi::{CStr, CString};
use std::ptr;

use finapprox_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = fa_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn kn_round_trip_and_checks() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(fa_build_kn(3, 2, &mut alg), FaStatus::Ok);
        let mut n = 0usize;
        assert_eq!(fa_algebra_size(alg, &mut n), FaStatus::Ok);
        assert_eq!(n, 9);

        let mut holds = -1;
        let st = fa_check_approximation(alg, c("pball(3, 0)").as_ptr(), c("1/9").as_ptr(), &mut holds);
        assert_eq!(st, FaStatus::Ok, "{}", last_error());
        assert_eq!(holds, 1);

        let mut json = ptr::null_mut();
        assert_eq!(fa_algebra_to_json(alg, &mut json), FaStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(fa_algebra_from_json(json, &mut back), FaStatus::Ok);
        let mut m = 0usize;
        fa_algebra_size(back, &mut m);
        assert_eq!(m, 9);

        // K_n is a ring, so no law fails
        let mut w = ptr::null_mut();
        assert_eq!(fa_law_search(alg, c("assoc-mul").as_ptr(), &mut w), FaStatus::Ok);
        assert!(w.is_null());

        fa_string_free(json);
        fa_algebra_free(back);
        fa_algebra_free(alg);
    }
}

#[test]
fn apq_has_an_associativity_witness() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(fa_build_apq(1, 1, &mut alg), FaStatus::Ok, "{}", last_error());
        let mut w = ptr::null_mut();
        assert_eq!(fa_law_search(alg, c("assoc-add").as_ptr(), &mut w), FaStatus::Ok);
        assert!(!w.is_null());
        let text = CStr::from_ptr(w).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert!(v.is_object());
        fa_string_free(w);
        fa_algebra_free(alg);
    }
}

#[test]
fn eval_on_modular() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(fa_build_modular(20, c("1/10").as_ptr(), &mut alg), FaStatus::Ok, "{}", last_error());
        let mut v = -1;
        let st = fa_eval(alg, c("exists z in [-1, 1] : x + z = y").as_ptr(), c("x=0, y=1/2").as_ptr(), &mut v);
        assert_eq!(st, FaStatus::Ok, "{}", last_error());
        assert_eq!(v, 1);
        let st = fa_eval(alg, c("exists z in [0, 1/10] : x + z = y").as_ptr(), c("x=0,y=1/2").as_ptr(), &mut v);
        assert_eq!(st, FaStatus::Ok);
        assert_eq!(v, 0);
        fa_algebra_free(alg);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(fa_build_kn(4, 2, &mut alg), FaStatus::InvalidParameter);
        assert!(alg.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(fa_build_kn(2, 2, ptr::null_mut()), FaStatus::NullArgument);
        assert_eq!(fa_algebra_from_json(c("{not json").as_ptr(), &mut alg), FaStatus::Parse);

        fa_build_kn(2, 2, &mut alg);
        let mut v = 0;
        let st = fa_eval(alg, c("forall x : x = x").as_ptr(), ptr::null(), &mut v);
        assert_ne!(st, FaStatus::Ok);
        let st = fa_eval(alg, c("exists z in pball(2,0) : (z = ").as_ptr(), ptr::null(), &mut v);
        assert_eq!(st, FaStatus::Parse);
        let bad = [0xffu8, 0];
        assert_eq!(fa_law_search(alg, bad.as_ptr().cast(), &mut ptr::null_mut()), FaStatus::InvalidUtf8);

        let mut n = 0usize;
        assert_eq!(fa_algebra_size(alg, &mut n), FaStatus::Ok);
        assert!(fa_last_error().is_null());
        fa_algebra_free(alg);
        fa_algebra_free(ptr::null_mut());
        fa_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/finapprox.h")).unwrap();
    for f in [
        "fa_last_error", "fa_build_kn", "fa_build_hmn", "fa_build_apq", "fa_build_modular", "fa_algebra_from_json",
        "fa_algebra_to_json", "fa_algebra_size", "fa_check_approximation", "fa_law_search", "fa_eval",
        "fa_algebra_free", "fa_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct FaAlgebra FaAlgebra"));
}
