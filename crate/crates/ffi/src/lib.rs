//! C ABI over `orlicz-polytope`.
//!
//! Every fallible function returns an [`OpStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! read back with [`op_last_error`]. Bodies and Orlicz functions are opaque
//! handles owned by the caller and released with their `_free` function.
//! Pass `INFINITY` as `p` for the cube.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orlicz_polytope::bodies::{support_function, BodySpec, Direction};
use orlicz_polytope::estimators::{expected_support_mc, expected_support_orlicz, PolytopeExperiment};
use orlicz_polytope::mathkit::{ball_volume, log_gamma};
use orlicz_polytope::orlicz::{invert_for_support, luxemburg_norm, OrliczFunction, PBallSpec};
use orlicz_polytope::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpStatus {
    Ok = 0,
    Domain = 1,
    Accuracy = 2,
    DegenerateParameter = 3,
    Range = 4,
    Precondition = 5,
    Estimation = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Opaque handle to a body `B_p^n` or `D_p^n`.
pub struct OpBody(BodySpec);

/// Opaque handle to an Orlicz function.
pub struct OpOrlicz(OrliczFunction);

/// Monte Carlo summary of `max_i |<X_i, θ>|` over independent polytopes.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OpMcSummary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OpStatus {
    match e {
        Error::Domain(_) => OpStatus::Domain,
        Error::Accuracy { .. } => OpStatus::Accuracy,
        Error::DegenerateParameter(_) => OpStatus::DegenerateParameter,
        Error::Range(_) => OpStatus::Range,
        Error::Precondition(_) => OpStatus::Precondition,
        Error::Estimation(_) => OpStatus::Estimation,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, stores its value in `out` and maps errors and panics to codes.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Result<T, Fail>) -> OpStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return OpStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            OpStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            OpStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            OpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn direction(theta: *const f64, len: usize) -> Result<Direction, Fail> {
    Ok(Direction::new(slice(theta, len, "theta")?.to_vec())?)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn op_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn op_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn op_log_gamma(x: f64, out: *mut f64) -> OpStatus {
    guard(out, || Ok(log_gamma(x)?))
}

/// Volume of the unit ball `B_p^n`.
#[no_mangle]
pub unsafe extern "C" fn op_ball_volume(p: f64, n: usize, out: *mut f64) -> OpStatus {
    guard(out, || Ok(ball_volume(p, n)?))
}

/// `B_p^n`, or the volume-one `D_p^n` when `normalized` is nonzero.
#[no_mangle]
pub unsafe extern "C" fn op_body_new(p: f64, n: usize, normalized: i32, out: *mut *mut OpBody) -> OpStatus {
    guard(out, || Ok(boxed(OpBody(BodySpec::new(p, n, normalized != 0)?))))
}

#[no_mangle]
pub unsafe extern "C" fn op_body_free(body: *mut OpBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// `h_K(θ)` for `θ` of length `len`, normalized internally.
#[no_mangle]
pub unsafe extern "C" fn op_support_function(body: *const OpBody, theta: *const f64, len: usize, out: *mut f64) -> OpStatus {
    guard(out, || {
        let b = deref(body, "body")?;
        Ok(support_function(&b.0, &direction(theta, len)?)?)
    })
}

/// `t ↦ t^q`.
#[no_mangle]
pub unsafe extern "C" fn op_orlicz_power(q: f64, out: *mut *mut OpOrlicz) -> OpStatus {
    guard(out, || Ok(boxed(OpOrlicz(OrliczFunction::power(q)?))))
}

/// Coordinate Orlicz function of `D_p^n` (first closed form, `n >= 2`).
#[no_mangle]
pub unsafe extern "C" fn op_orlicz_pball(p: f64, n: usize, out: *mut *mut OpOrlicz) -> OpStatus {
    guard(out, || Ok(boxed(OpOrlicz(OrliczFunction::pball_first(PBallSpec::new(p, n)?)?))))
}

/// Average over the sphere of the Orlicz functions of `<θ, e_1>`.
#[no_mangle]
pub unsafe extern "C" fn op_orlicz_spherical(n: usize, out: *mut *mut OpOrlicz) -> OpStatus {
    guard(out, || Ok(boxed(OpOrlicz(OrliczFunction::spherical(n)?))))
}

/// Orlicz function of the empirical law of `|values|`.
#[no_mangle]
pub unsafe extern "C" fn op_orlicz_empirical(values: *const f64, len: usize, out: *mut *mut OpOrlicz) -> OpStatus {
    guard(out, || {
        let v = slice(values, len, "values")?.to_vec();
        Ok(boxed(OpOrlicz(OrliczFunction::empirical(v)?)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn op_orlicz_free(m: *mut OpOrlicz) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

#[no_mangle]
pub unsafe extern "C" fn op_orlicz_eval(m: *const OpOrlicz, t: f64, out: *mut f64) -> OpStatus {
    guard(out, || Ok(deref(m, "orlicz")?.0.eval(t)?))
}

/// The least `s > 0` with `M(1/s) <= 1/N`, the Orlicz estimate of
/// `E max_{i<=N} |X_i|`.
#[no_mangle]
pub unsafe extern "C" fn op_orlicz_invert(m: *const OpOrlicz, n_points: u64, out: *mut f64) -> OpStatus {
    guard(out, || Ok(invert_for_support(&deref(m, "orlicz")?.0, n_points)?))
}

#[no_mangle]
pub unsafe extern "C" fn op_luxemburg_norm(x: *const f64, len: usize, m: *const OpOrlicz, out: *mut f64) -> OpStatus {
    guard(out, || {
        let m = deref(m, "orlicz")?;
        Ok(luxemburg_norm(slice(x, len, "x")?, &m.0)?)
    })
}

/// Orlicz estimate of `E h_{K_N}(θ)`.
#[no_mangle]
pub unsafe extern "C" fn op_expected_support_orlicz(
    body: *const OpBody,
    theta: *const f64,
    len: usize,
    n_points: u64,
    out: *mut f64,
) -> OpStatus {
    guard(out, || {
        let b = deref(body, "body")?;
        Ok(expected_support_orlicz(&b.0, &direction(theta, len)?, n_points)?)
    })
}

/// Monte Carlo value of `E h_{K_N}(θ)` from `trials` seeded polytopes.
#[no_mangle]
pub unsafe extern "C" fn op_expected_support_mc(
    body: *const OpBody,
    theta: *const f64,
    len: usize,
    n_points: u64,
    trials: usize,
    seed: u64,
    out: *mut OpMcSummary,
) -> OpStatus {
    guard(out, || {
        let b = deref(body, "body")?;
        let exp = PolytopeExperiment::new(b.0, n_points, direction(theta, len)?, trials, seed)?;
        let report = expected_support_mc(&exp)?;
        let mc = report.mc.ok_or_else(|| Error::Estimation("no Monte Carlo trials".into()))?;
        Ok(OpMcSummary { mean: mc.mean, sd: mc.sd, ci_low: mc.ci95.0, ci_high: mc.ci95.1, trials: mc.trials })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn gamma_and_volume() {
        let mut v = 0.0;
        assert_eq!(unsafe { op_log_gamma(5.0, &mut v) }, OpStatus::Ok);
        assert!((v - 24f64.ln()).abs() < 1e-12);
        assert_eq!(unsafe { op_ball_volume(f64::INFINITY, 3, &mut v) }, OpStatus::Ok);
        assert_eq!(v, 8.0);
    }

    #[test]
    fn errors_set_message() {
        let mut v = 0.0;
        assert_eq!(unsafe { op_log_gamma(-1.0, &mut v) }, OpStatus::Domain);
        let msg = unsafe { CStr::from_ptr(op_last_error()) }.to_str().unwrap();
        assert!(msg.starts_with("domain error"));
        assert_eq!(unsafe { op_log_gamma(1.0, ptr::null_mut()) }, OpStatus::NullPointer);
        assert_eq!(unsafe { op_orlicz_eval(ptr::null(), 1.0, &mut v) }, OpStatus::NullPointer);
    }
}
