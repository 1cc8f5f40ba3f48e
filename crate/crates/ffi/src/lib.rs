//! C ABI over the `accavity` crate.
//!
//! Every fallible function returns an [`AccStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`acc_last_error_message`]. Handles are opaque and must be
//! released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use accavity::asymptotics::{energy_case1, energy_case2, Branch, Case1Params};
use accavity::model::{derive, missing_phase, Channel, DerivedParams, ModelError, PhysicalConfig, Spin};
use accavity::quantize::{solve_channel, SearchControls, SolveError};
use accavity::specfun::{tricomi_u, SpecFunError};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Cutoff = 4,
    SpecialFunction = 5,
    Solver = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// Physical configuration. Opaque.
pub struct AccConfig {
    cfg: PhysicalConfig,
}

/// Energies of one channel from the exact solver, ascending. Opaque.
pub struct AccSpectrum {
    energies: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AccStatus, msg: impl std::fmt::Display) -> AccStatus {
    set_error(msg.to_string());
    status
}

fn guard(f: impl FnOnce() -> AccStatus) -> AccStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(AccStatus::Panic, "internal panic"))
}

fn model_status(e: ModelError) -> AccStatus {
    fail(AccStatus::InvalidConfig, e)
}

fn solve_status(e: SolveError) -> AccStatus {
    match e {
        SolveError::InvalidRange { .. } => fail(AccStatus::InvalidArgument, e),
        SolveError::SpecFun(_) => fail(AccStatus::SpecialFunction, e),
        _ => fail(AccStatus::Solver, e),
    }
}

fn specfun_status(e: SpecFunError) -> AccStatus {
    fail(AccStatus::SpecialFunction, e)
}

fn spin(s: i32) -> Result<Spin, AccStatus> {
    match s {
        1 => Ok(Spin::Up),
        -1 => Ok(Spin::Down),
        _ => Err(fail(AccStatus::InvalidArgument, format!("s: {s} must be +1 or -1"))),
    }
}

/// NaN `phi_override` keeps the configuration's own phase.
unsafe fn channel_params(
    cfg: *const AccConfig,
    ell: i64,
    s: i32,
    phi_override: f64,
) -> Result<DerivedParams, AccStatus> {
    let cfg = cfg.as_ref().ok_or_else(|| fail(AccStatus::NullPointer, "config is null"))?;
    let dp = derive(&cfg.cfg, Channel::new(ell, spin(s)?)).map_err(model_status)?;
    Ok(if phi_override.is_nan() { dp } else { dp.with_phase(phi_override) })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn acc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Validates and stores a configuration.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn acc_config_new(
    m: f64,
    mu: f64,
    rho: f64,
    r_a: f64,
    r_b: f64,
    out: *mut *mut AccConfig,
) -> AccStatus {
    guard(|| {
        if out.is_null() {
            return fail(AccStatus::NullPointer, "out is null");
        }
        match PhysicalConfig::new(m, mu, rho, r_a, r_b) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(AccConfig { cfg }));
                AccStatus::Ok
            }
            Err(e) => model_status(e),
        }
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`acc_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn acc_config_free(cfg: *mut AccConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Missing phase for spin `s` (+1 or -1).
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn acc_missing_phase(cfg: *const AccConfig, s: i32, out: *mut f64) -> AccStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return fail(AccStatus::NullPointer, "null argument");
        };
        match spin(s) {
            Ok(s) => {
                *out = missing_phase(&cfg.cfg, s);
                AccStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// All exact levels of channel (`ell`, `s`) below `e_max`.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn acc_spectrum_solve(
    cfg: *const AccConfig,
    ell: i64,
    s: i32,
    phi_override: f64,
    e_max: f64,
    out: *mut *mut AccSpectrum,
) -> AccStatus {
    guard(|| {
        if out.is_null() {
            return fail(AccStatus::NullPointer, "out is null");
        }
        let dp = match channel_params(cfg, ell, s, phi_override) {
            Ok(dp) => dp,
            Err(st) => return st,
        };
        match solve_channel(&dp, e_max, &SearchControls::default()) {
            Ok(levels) => {
                let energies = levels.iter().map(|l| l.energy).collect();
                *out = Box::into_raw(Box::new(AccSpectrum { energies }));
                AccStatus::Ok
            }
            Err(e) => solve_status(e),
        }
    })
}

/// Number of levels; 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acc_spectrum_len(spec: *const AccSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.energies.len())
}

/// # Safety
/// `spec` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn acc_spectrum_energy(spec: *const AccSpectrum, n: usize, out: *mut f64) -> AccStatus {
    guard(|| {
        let (Some(spec), false) = (spec.as_ref(), out.is_null()) else {
            return fail(AccStatus::NullPointer, "null argument");
        };
        match spec.energies.get(n) {
            Some(&e) => {
                *out = e;
                AccStatus::Ok
            }
            None => fail(
                AccStatus::IndexOutOfRange,
                format!("n = {n} but the spectrum has {} levels", spec.energies.len()),
            ),
        }
    })
}

/// # Safety
/// `spec` must be null or a handle from [`acc_spectrum_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn acc_spectrum_free(spec: *mut AccSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Landau-like level for a vanishing cavity.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn acc_energy_case2(
    cfg: *const AccConfig,
    ell: i64,
    s: i32,
    phi_override: f64,
    n: usize,
    out: *mut f64,
) -> AccStatus {
    guard(|| {
        if out.is_null() {
            return fail(AccStatus::NullPointer, "out is null");
        }
        match channel_params(cfg, ell, s, phi_override) {
            Ok(dp) => {
                *out = energy_case2(n, &dp);
                AccStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// Large-phase closed form; `branch` is +1 or -1. Fails with
/// [`AccStatus::Cutoff`] above the largest admissible `n`.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn acc_energy_case1(
    cfg: *const AccConfig,
    ell: i64,
    s: i32,
    phi_override: f64,
    branch: i32,
    n: usize,
    out: *mut f64,
) -> AccStatus {
    guard(|| {
        if out.is_null() {
            return fail(AccStatus::NullPointer, "out is null");
        }
        let branch = match branch {
            1 => Branch::Plus,
            -1 => Branch::Minus,
            _ => return fail(AccStatus::InvalidArgument, format!("branch: {branch} must be +1 or -1")),
        };
        let dp = match channel_params(cfg, ell, s, phi_override) {
            Ok(dp) => dp,
            Err(st) => return st,
        };
        match Case1Params::new(branch, n, &dp).and_then(|p| energy_case1(&p, &dp)) {
            Ok(e) => {
                *out = e;
                AccStatus::Ok
            }
            Err(e) => fail(AccStatus::Cutoff, e),
        }
    })
}

/// Tricomi's U(a, b; x) for x > 0.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn acc_tricomi_u(a: f64, b: f64, x: f64, out: *mut f64) -> AccStatus {
    guard(|| {
        if out.is_null() {
            return fail(AccStatus::NullPointer, "out is null");
        }
        match tricomi_u(a, b, x) {
            Ok(v) => {
                *out = v.value;
                AccStatus::Ok
            }
            Err(e) => specfun_status(e),
        }
    })
}
