use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use plevel_ffi::*;

fn last_error() -> String {
    let p = plevel_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(p: f64) -> *mut PlevelModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { plevel_model_new(p, &mut m) }, PlevelStatus::Ok);
    assert!(!m.is_null());
    m
}

fn warp(kind: PlevelFamilyKind, scale: f64, eps: f64) -> *mut PlevelWarp {
    let mut w = ptr::null_mut();
    assert_eq!(
        unsafe { plevel_warp_new(kind, scale, eps, &mut w) },
        PlevelStatus::Ok
    );
    w
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(plevel_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, plevel_core::VERSION);
}

#[test]
fn model_constants_and_points() {
    let m = model(1.5);
    let mut c = PlevelModelConstants::default();
    assert_eq!(
        unsafe { plevel_model_constants(m, &mut c) },
        PlevelStatus::Ok
    );
    assert!((c.cs - 60.0).abs() < 1e-10);
    assert!((c.kp - 4.0 * std::f64::consts::PI * 60f64.sqrt()).abs() < 1e-10);
    let mut pt = PlevelModelPoint::default();
    assert_eq!(
        unsafe { plevel_model_eval(m, 1.0, &mut pt) },
        PlevelStatus::Ok
    );
    assert!((pt.du + 15.0 / 16.0).abs() < 1e-14);
    assert_eq!(
        unsafe { plevel_model_eval(m, 0.5, &mut pt) },
        PlevelStatus::InvalidParameter
    );
    assert!(last_error().contains("r = 0.5"));
    unsafe { plevel_model_free(m) };
}

#[test]
fn invalid_and_null_arguments() {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { plevel_model_new(2.0, &mut m) },
        PlevelStatus::InvalidParameter
    );
    assert!(m.is_null());
    assert!(last_error().contains("outside (1, 2)"));
    assert_eq!(
        unsafe { plevel_model_new(1.5, ptr::null_mut()) },
        PlevelStatus::NullPointer
    );
    let mut x = 0.0;
    assert_eq!(
        unsafe { plevel_warp_adm(ptr::null(), &mut x) },
        PlevelStatus::NullPointer
    );
    let mut w = ptr::null_mut();
    assert_eq!(
        unsafe { plevel_warp_new(PlevelFamilyKind::Schwarzschild, -1.0, 0.0, &mut w) },
        PlevelStatus::InvalidParameter
    );
    unsafe {
        plevel_model_free(ptr::null_mut());
        plevel_warp_free(ptr::null_mut());
    }
}

#[test]
fn warp_capacity_and_mass() {
    let w = warp(PlevelFamilyKind::Euclidean, 1.0, 0.0);
    let (mut cp, mut adm) = (0.0, 1.0);
    assert_eq!(
        unsafe { plevel_warp_capacity(w, 1.5, &mut cp) },
        PlevelStatus::Ok
    );
    assert!((cp - 4.0 * std::f64::consts::PI * 3f64.sqrt()).abs() < 1e-10);
    assert_eq!(unsafe { plevel_warp_adm(w, &mut adm) }, PlevelStatus::Ok);
    assert_eq!(adm, 0.0);
    assert_eq!(
        unsafe { plevel_warp_capacity(w, 3.0, &mut cp) },
        PlevelStatus::InvalidParameter
    );
    unsafe { plevel_warp_free(w) };
}

#[test]
fn verify_cells() {
    let m = model(1.5);
    let mut s = PlevelCellSummary::default();

    let schw = warp(PlevelFamilyKind::Schwarzschild, 2.0, 0.0);
    assert_eq!(unsafe { plevel_verify(m, schw, &mut s) }, PlevelStatus::Ok);
    assert!(s.passed && s.equality && s.margin.abs() < 1e-8 && s.failed_checks == 0);

    let bumped = warp(PlevelFamilyKind::Bumped, 1.0, 0.1);
    assert_eq!(
        unsafe { plevel_verify(m, bumped, &mut s) },
        PlevelStatus::Ok
    );
    assert!(s.passed && !s.equality && s.margin > 0.0);
    assert!(s.min_slope_decaying >= -1e-8 && s.min_slope_growing >= -1e-8);

    let negative = warp(PlevelFamilyKind::Bumped, 1.0, -0.1);
    assert_eq!(
        unsafe { plevel_verify(m, negative, &mut s) },
        PlevelStatus::Ok
    );
    assert!(!s.passed && s.margin.is_nan() && s.failed_checks == 1);
    assert!(last_error().contains("hypotheses"));

    unsafe {
        plevel_warp_free(schw);
        plevel_warp_free(bumped);
        plevel_warp_free(negative);
        plevel_model_free(m);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/plevel.h")).unwrap();
    for name in [
        "plevel_version",
        "plevel_last_error",
        "plevel_model_new",
        "plevel_model_free",
        "plevel_model_constants",
        "plevel_model_eval",
        "plevel_warp_new",
        "plevel_warp_free",
        "plevel_warp_capacity",
        "plevel_warp_adm",
        "plevel_verify",
        "typedef struct PlevelModel PlevelModel;",
        "PLEVEL_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles `tests/c/smoke.c` against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libplevel_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler");
    assert!(
        cc.status.success(),
        "{}",
        String::from_utf8_lossy(&cc.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("plevel "));
}
