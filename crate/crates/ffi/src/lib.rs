//! C ABI over `logweyl`.
//!
//! Every function returns an `int32_t` status (`LW_OK` on success) and
//! writes results through out-pointers. Spectra are passed around as opaque
//! `LwSpectrum*` handles that must be released with `lw_spectrum_free`.
//! After a failure, `lw_last_error` copies a message for the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use logweyl::asymptotics::{fit_log_weyl, level_tags, zeta_partial};
use logweyl::cornerflow::{flow_closed, flow_numeric, return_time, CornerState, ReturnTime};
use logweyl::spectrum::{
    compute_spectrum, counting_function, DiscretizationConfig, OperatorKind, SchemeOrder, SpectralData,
};
use logweyl::traces::{digamma, gamma1_closed, gamma2_closed, sphere_volume};
use logweyl::Error;

pub const LW_OK: i32 = 0;
/// A required pointer argument was null.
pub const LW_ERR_NULL: i32 = 1;
/// Precondition or domain violation.
pub const LW_ERR_INVALID: i32 = 2;
/// An iteration did not converge or a fit was rank deficient.
pub const LW_ERR_NUMERIC: i32 = 3;
/// File could not be read, written or parsed.
pub const LW_ERR_IO: i32 = 4;
/// The caller's buffer is too small; the required length was written.
pub const LW_ERR_BUFFER: i32 = 5;
/// A Rust panic was caught at the boundary.
pub const LW_ERR_PANIC: i32 = 6;

pub const LW_OPERATOR_MODEL: i32 = 0;
pub const LW_OPERATOR_UNIT_WEIGHT: i32 = 1;
pub const LW_OPERATOR_HARMONIC: i32 = 2;

/// Opaque handle to a computed or loaded spectrum.
pub struct LwSpectrum {
    inner: SpectralData,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Domain(_) => LW_ERR_INVALID,
        Error::NonConvergence(_) | Error::RankDeficient(_) => LW_ERR_NUMERIC,
        Error::Io { .. } | Error::Parse { .. } => LW_ERR_IO,
    }
}

enum Fail {
    Code(i32, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null(name: &str) -> Fail {
    Fail::Code(LW_ERR_NULL, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LW_OK,
        Ok(Err(Fail::Lib(e))) => {
            let c = code_of(&e);
            set_error(e.to_string());
            c
        }
        Ok(Err(Fail::Code(c, msg))) => {
            set_error(msg);
            c
        }
        Err(_) => {
            set_error("internal panic".into());
            LW_ERR_PANIC
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Code(LW_ERR_INVALID, "path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

unsafe fn spectrum<'a>(h: *const LwSpectrum) -> Result<&'a SpectralData, Fail> {
    h.as_ref().map(|s| &s.inner).ok_or_else(|| null("spectrum handle"))
}

fn into_handle(s: SpectralData, dst: &mut *mut LwSpectrum) {
    *dst = Box::into_raw(Box::new(LwSpectrum { inner: s }));
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`) and returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn lw_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Closed-form Weyl coefficients of the model operator in dimension `d`.
#[no_mangle]
pub unsafe extern "C" fn lw_gamma_closed(d: usize, gamma2: *mut f64, gamma1: *mut f64) -> i32 {
    guard(|| {
        let (g2, g1) = (out(gamma2, "gamma2")?, out(gamma1, "gamma1")?);
        *g2 = gamma2_closed(d)?;
        *g1 = gamma1_closed(d)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_digamma(x: f64, result: *mut f64) -> i32 {
    guard(|| {
        *out(result, "result")? = digamma(x)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_sphere_volume(d: usize, result: *mut f64) -> i32 {
    guard(|| {
        *out(result, "result")? = sphere_volume(d)?;
        Ok(())
    })
}

/// Lowest `count` eigenvalues of a grid operator (`LW_OPERATOR_*`).
/// `scheme_order` is 2 or 4.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_compute(
    dimension: usize,
    half_width: f64,
    grid_points: usize,
    scheme_order: u32,
    operator: i32,
    count: usize,
    handle: *mut *mut LwSpectrum,
) -> i32 {
    guard(|| {
        let dst = out(handle, "handle")?;
        let op = match operator {
            LW_OPERATOR_MODEL => OperatorKind::Model,
            LW_OPERATOR_UNIT_WEIGHT => OperatorKind::UnitWeight,
            LW_OPERATOR_HARMONIC => OperatorKind::Harmonic,
            other => return Err(Fail::Code(LW_ERR_INVALID, format!("unknown operator code {other}"))),
        };
        let cfg = DiscretizationConfig::new(dimension, half_width, grid_points, SchemeOrder::from_int(scheme_order)?)?
            .with_operator(op);
        into_handle(compute_spectrum(&cfg, count)?, dst);
        Ok(())
    })
}

/// A spectrum from caller-supplied eigenvalues, taken as complete and
/// fully trusted.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_from_values(values: *const f64, len: usize, handle: *mut *mut LwSpectrum) -> i32 {
    guard(|| {
        let dst = out(handle, "handle")?;
        let v = slice(values, len, "values")?;
        into_handle(SpectralData::from_exact(v.to_vec())?, dst);
        Ok(())
    })
}

/// Loads a spectrum CSV written by `lw_spectrum_write` or the CLI.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_read(file: *const c_char, handle: *mut *mut LwSpectrum) -> i32 {
    guard(|| {
        let dst = out(handle, "handle")?;
        into_handle(SpectralData::read_files(path(file)?)?, dst);
        Ok(())
    })
}

/// Writes the CSV and its `.json` sidecar.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_write(handle: *const LwSpectrum, file: *const c_char) -> i32 {
    guard(|| {
        spectrum(handle)?.write_files(path(file)?)?;
        Ok(())
    })
}

/// Releases a handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_free(handle: *mut LwSpectrum) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_len(handle: *const LwSpectrum, len: *mut usize, trusted: *mut usize) -> i32 {
    guard(|| {
        let s = spectrum(handle)?;
        *out(len, "len")? = s.len();
        *out(trusted, "trusted")? = s.trusted_count();
        Ok(())
    })
}

/// Copies all eigenvalues into `buf`. If `cap` is too small nothing is
/// copied, `written` receives the required length and `LW_ERR_BUFFER` is
/// returned.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_eigenvalues(
    handle: *const LwSpectrum,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> i32 {
    guard(|| {
        let s = spectrum(handle)?;
        let w = out(written, "written")?;
        let v = s.eigenvalues();
        *w = v.len();
        if cap < v.len() {
            return Err(Fail::Code(LW_ERR_BUFFER, format!("need room for {} values, got {cap}", v.len())));
        }
        slice_mut(buf, v.len(), "buf")?.copy_from_slice(v);
        Ok(())
    })
}

/// Eigenvalues raised to `p` (e.g. 0.5 to pass from `Q` to `P`), as a new
/// handle.
#[no_mangle]
pub unsafe extern "C" fn lw_spectrum_powered(handle: *const LwSpectrum, p: f64, result: *mut *mut LwSpectrum) -> i32 {
    guard(|| {
        let dst = out(result, "result")?;
        into_handle(spectrum(handle)?.powered(p)?, dst);
        Ok(())
    })
}

/// `N(λ)`, the number of trusted eigenvalues strictly below `lambda`.
#[no_mangle]
pub unsafe extern "C" fn lw_counting(handle: *const LwSpectrum, lambda: f64, result: *mut usize) -> i32 {
    guard(|| {
        let s = spectrum(handle)?;
        *out(result, "result")? = counting_function(s, lambda)?;
        Ok(())
    })
}

/// `Σ λ_j^{−s}` over the trusted eigenvalues, without tail correction.
#[no_mangle]
pub unsafe extern "C" fn lw_zeta_partial(handle: *const LwSpectrum, s: f64, result: *mut f64) -> i32 {
    guard(|| {
        let spec = spectrum(handle)?;
        *out(result, "result")? = zeta_partial(spec, s, None)?;
        Ok(())
    })
}

unsafe fn corner(d: usize, omega: *const f64, theta: *const f64) -> Result<CornerState, Fail> {
    if d == 0 {
        return Err(Fail::Code(LW_ERR_INVALID, "dimension must be >= 1".into()));
    }
    Ok(CornerState::new(slice(omega, d, "omega")?.to_vec(), slice(theta, d, "theta")?.to_vec())?)
}

/// Minimal return time of `(ω, θ)`: the period, 0 at fixed points, +inf if
/// the state never returns.
#[no_mangle]
pub unsafe extern "C" fn lw_return_time(d: usize, omega: *const f64, theta: *const f64, result: *mut f64) -> i32 {
    guard(|| {
        let z = corner(d, omega, theta)?;
        *out(result, "result")? = return_time(&z).value();
        Ok(())
    })
}

/// Moves `(ω, θ)` (each of length `d`) along the corner flow for time `t`,
/// in place. `tol <= 0` selects the closed-form solution, otherwise the
/// adaptive integrator with that tolerance.
#[no_mangle]
pub unsafe extern "C" fn lw_flow(d: usize, omega: *mut f64, theta: *mut f64, t: f64, tol: f64) -> i32 {
    guard(|| {
        let z = corner(d, omega, theta)?;
        let moved = if tol > 0.0 { flow_numeric(&z, t, tol)? } else { flow_closed(&z, t) };
        slice_mut(omega, d, "omega")?.copy_from_slice(moved.omega());
        slice_mut(theta, d, "theta")?.copy_from_slice(moved.theta());
        Ok(())
    })
}

/// Whether `(ω, θ)` is a fixed point of the flow (writes 1 or 0).
#[no_mangle]
pub unsafe extern "C" fn lw_is_fixed_point(d: usize, omega: *const f64, theta: *const f64, result: *mut i32) -> i32 {
    guard(|| {
        let z = corner(d, omega, theta)?;
        *out(result, "result")? = matches!(return_time(&z), ReturnTime::FixedPoint) as i32;
        Ok(())
    })
}

/// Number of coefficients a fit with `levels` levels produces.
#[no_mangle]
pub unsafe extern "C" fn lw_fit_size(levels: u32, result: *mut usize) -> i32 {
    guard(|| {
        *out(result, "result")? = level_tags(levels)?.len();
        Ok(())
    })
}

/// Least-squares fit of `N(λ)` in the basis `λ^{a−k} (log λ)^j`, `k <
/// levels`, `j ∈ {1, 0}`. Coefficients are written in the order
/// `(k=0,j=1), (k=0,j=0), (k=1,j=1), ...`; `coeffs` must hold
/// `lw_fit_size(levels)` values.
#[no_mangle]
pub unsafe extern "C" fn lw_fit(
    lambdas: *const f64,
    counts: *const f64,
    n: usize,
    exponent: f64,
    levels: u32,
    coeffs: *mut f64,
    cap: usize,
    residual_sup: *mut f64,
) -> i32 {
    guard(|| {
        let res = out(residual_sup, "residual_sup")?;
        let need = level_tags(levels)?.len();
        if cap < need {
            return Err(Fail::Code(LW_ERR_BUFFER, format!("need room for {need} coefficients, got {cap}")));
        }
        let l = slice(lambdas, n, "lambdas")?;
        let c = slice(counts, n, "counts")?;
        let pts: Vec<(f64, f64)> = l.iter().copied().zip(c.iter().copied()).collect();
        let fit = fit_log_weyl(&pts, exponent, levels)?;
        let dst = slice_mut(coeffs, need, "coeffs")?;
        for (d, (_, v)) in dst.iter_mut().zip(&fit.coefficients) {
            *d = *v;
        }
        *res = fit.residual_sup;
        Ok(())
    })
}
