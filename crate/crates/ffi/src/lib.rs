//! C ABI over `plevel-core`.
//!
//! Handles are opaque and owned by the caller: every `*_new` has a matching
//! `*_free`. Functions return a [`PlevelStatus`]; on failure the message is
//! available from [`plevel_last_error`] on the same thread until the next
//! failing call. Panics are caught and reported as `PLEVEL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plevel_core::verify::{verify_cell, Grids, ModelBundle};
use plevel_core::warped::{capacity_cp, masses, radial_p_harmonic, Family, WarpProfile};
use plevel_core::{Error, Tolerances};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlevelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Numerical = 3,
    Hypothesis = 4,
    CheckFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlevelFamilyKind {
    Schwarzschild = 0,
    Bumped = 1,
    Euclidean = 2,
}

/// Reference model, both coefficient triples and diagnostics for one `p`.
pub struct PlevelModel {
    bundle: ModelBundle,
}

/// A warped-product metric.
pub struct PlevelWarp {
    family: Family,
    profile: WarpProfile,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlevelModelConstants {
    pub p: f64,
    /// flux constant of the unit-normalized model potential
    pub cs: f64,
    pub kp: f64,
    pub c_fit: f64,
    pub c_tilde: f64,
    /// `W` on the horizon
    pub w0: f64,
    /// constant value of the growing quantity on the model
    pub q_growing: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlevelModelPoint {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub t: f64,
    pub w: f64,
    pub dwdt: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlevelCellSummary {
    pub cp: f64,
    pub adm: f64,
    /// `m_ADM - 2 (C_p/K_p)^{1/(3-p)}`
    pub margin: f64,
    pub min_slope_decaying: f64,
    pub min_slope_growing: f64,
    pub equality: bool,
    pub passed: bool,
    /// number of checks that failed
    pub failed_checks: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlevelStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) => PlevelStatus::InvalidParameter,
        Error::Hypothesis(_) => PlevelStatus::Hypothesis,
        Error::CheckFailed(_) => PlevelStatus::CheckFailed,
        _ => PlevelStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (PlevelStatus, String)>>(f: F) -> PlevelStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlevelStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside plevel".into());
            PlevelStatus::Panic
        }
    }
}

fn core<T>(r: plevel_core::Result<T>) -> Result<T, (PlevelStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (PlevelStatus, String) {
    (PlevelStatus::NullPointer, "null pointer argument".into())
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn plevel_version() -> *const c_char {
    concat!("plevel ", env!("CARGO_PKG_VERSION"), "\0")
        .as_ptr()
        .cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn plevel_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds the model for `p` with default grids and tolerances.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn plevel_model_new(p: f64, out: *mut *mut PlevelModel) -> PlevelStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(null)?;
        *out = ptr::null_mut();
        let bundle = core(ModelBundle::new(
            p,
            &Grids::default(),
            &Tolerances::default(),
        ))?;
        *out = Box::into_raw(Box::new(PlevelModel { bundle }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`plevel_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plevel_model_free(model: *mut PlevelModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_model_constants(
    model: *const PlevelModel,
    out: *mut PlevelModelConstants,
) -> PlevelStatus {
    guard(|| {
        let (m, out) = unsafe { (model.as_ref(), out.as_mut()) };
        let (m, out) = (m.ok_or_else(null)?, out.ok_or_else(null)?);
        let g = &m.bundle.model;
        *out = PlevelModelConstants {
            p: g.p,
            cs: g.functions.flux_constant,
            kp: g.kp,
            c_fit: g.c_fit,
            c_tilde: g.c_tilde,
            w0: g.functions.point(1.0).w,
            q_growing: m.bundle.growing.model_q(),
        };
        Ok(())
    })
}

/// Model quantities at isotropic radius `r >= 1`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_model_eval(
    model: *const PlevelModel,
    r: f64,
    out: *mut PlevelModelPoint,
) -> PlevelStatus {
    guard(|| {
        let (m, out) = unsafe { (model.as_ref(), out.as_mut()) };
        let (m, out) = (m.ok_or_else(null)?, out.ok_or_else(null)?);
        if !(r >= 1.0 && r.is_finite()) {
            return Err((
                PlevelStatus::InvalidParameter,
                format!("r = {r} must be finite and >= 1"),
            ));
        }
        let q = m.bundle.model.functions.point(r);
        *out = PlevelModelPoint {
            r: q.r,
            u: q.u,
            du: q.du,
            t: q.t,
            w: q.w,
            dwdt: q.dwdt,
        };
        Ok(())
    })
}

/// Builds a warped metric. `scale` is the mass (Schwarzschild, bumped) or
/// the radius (Euclidean); `eps` is read only for the bumped family, whose
/// bump is supported on `[scale, 4 scale]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_warp_new(
    kind: PlevelFamilyKind,
    scale: f64,
    eps: f64,
    out: *mut *mut PlevelWarp,
) -> PlevelStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(null)?;
        *out = ptr::null_mut();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err((
                PlevelStatus::InvalidParameter,
                format!("scale = {scale} must be positive"),
            ));
        }
        let family = match kind {
            PlevelFamilyKind::Schwarzschild => Family::Schwarzschild { mass: scale },
            PlevelFamilyKind::Bumped => Family::bumped(scale, eps),
            PlevelFamilyKind::Euclidean => Family::Euclidean { radius: scale },
        };
        let g = Grids::default();
        let profile = core(WarpProfile::new(family, g.s_max * scale, g.warp_points))?;
        *out = Box::into_raw(Box::new(PlevelWarp { family, profile }));
        Ok(())
    })
}

/// # Safety
/// `warp` must be NULL or a handle from [`plevel_warp_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plevel_warp_free(warp: *mut PlevelWarp) {
    if !warp.is_null() {
        drop(unsafe { Box::from_raw(warp) });
    }
}

/// p-capacity of the inner boundary.
///
/// # Safety
/// `warp` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_warp_capacity(
    warp: *const PlevelWarp,
    p: f64,
    out: *mut f64,
) -> PlevelStatus {
    guard(|| {
        let (w, out) = unsafe { (warp.as_ref(), out.as_mut()) };
        let (w, out) = (w.ok_or_else(null)?, out.ok_or_else(null)?);
        *out = capacity_cp(&core(radial_p_harmonic(&w.profile, p))?);
        Ok(())
    })
}

/// # Safety
/// `warp` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_warp_adm(warp: *const PlevelWarp, out: *mut f64) -> PlevelStatus {
    guard(|| {
        let (w, out) = unsafe { (warp.as_ref(), out.as_mut()) };
        let (w, out) = (w.ok_or_else(null)?, out.ok_or_else(null)?);
        *out = core(masses(&w.profile))?.adm;
        Ok(())
    })
}

/// Runs every check on one metric. A failed check is not an error: the
/// call returns `PLEVEL_STATUS_OK` with `passed = false`; fields that were
/// not reached are NaN.
///
/// # Safety
/// `model` and `warp` must be live handles and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn plevel_verify(
    model: *const PlevelModel,
    warp: *const PlevelWarp,
    out: *mut PlevelCellSummary,
) -> PlevelStatus {
    guard(|| {
        let (m, w, out) = unsafe { (model.as_ref(), warp.as_ref(), out.as_mut()) };
        let (m, w, out) = (
            m.ok_or_else(null)?,
            w.ok_or_else(null)?,
            out.ok_or_else(null)?,
        );
        let cell = verify_cell(
            &m.bundle,
            w.family,
            &Grids::default(),
            &Tolerances::default(),
        );
        let r = &cell.report;
        let nan = f64::NAN;
        *out = PlevelCellSummary {
            cp: r.cp.unwrap_or(nan),
            adm: r.adm.unwrap_or(nan),
            margin: r.margin.unwrap_or(nan),
            min_slope_decaying: r.min_slope_qstar.unwrap_or(nan),
            min_slope_growing: r.min_slope_qgrow.unwrap_or(nan),
            equality: r.equality,
            passed: r.passed(),
            failed_checks: r.checks.iter().filter(|c| !c.passed).count() as u32,
        };
        if let Some(c) = r.checks.iter().find(|c| !c.passed) {
            set_error(format!(
                "check {} failed: {}",
                c.name,
                c.detail.clone().unwrap_or_default()
            ));
        }
        Ok(())
    })
}
