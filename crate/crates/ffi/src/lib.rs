//! C ABI over the deterministic parts of `ou-epr`: model constants, the
//! covariance spectrum, Cramér functions and rate functions.
//!
//! Objects are opaque heap handles created by `*_new` and released by the
//! matching `*_free`. Every fallible call returns an [`OuStatus`]; on failure
//! [`ou_last_error_message`] describes the most recent error on the calling
//! thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ou_epr::cramer::{cramer, cramer_quadrature, lambda_finite_t, rate_legendre, rate_paper};
use ou_epr::spectral::{eigenvalues, Kernel, Spectrum};
use ou_epr::{Error, Model};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoBracket = 4,
    Computation = 5,
    Panic = 6,
}

/// Model handle.
pub struct OuModel(Model);

/// Spectrum handle: the leading eigenvalues of the covariance operator.
pub struct OuSpectrum(Spectrum);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuDerivedConstants {
    pub r: f64,
    pub c: f64,
    pub ep: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> OuStatus {
    match err {
        Error::DegenerateTheta | Error::OutOfRange(_) | Error::Config(_) => {
            OuStatus::InvalidArgument
        }
        Error::Domain { .. } => OuStatus::Domain,
        Error::Bracket { .. } => OuStatus::NoBracket,
        _ => OuStatus::Computation,
    }
}

fn guard(f: impl FnOnce() -> Result<(), OuStatus>) -> OuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OuStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            OuStatus::Panic
        }
    }
}

fn check<T>(r: ou_epr::Result<T>) -> Result<T, OuStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, OuStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument".into());
        OuStatus::NullPointer
    })
}

fn non_null<T>(p: *mut T) -> Result<*mut T, OuStatus> {
    if p.is_null() {
        set_error("null output pointer".into());
        Err(OuStatus::NullPointer)
    } else {
        Ok(p)
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ou_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ou_model_new(theta: f64, out: *mut *mut OuModel) -> OuStatus {
    guard(|| {
        let out = non_null(out)?;
        let model = check(Model::new(theta))?;
        *out = Box::into_raw(Box::new(OuModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`ou_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ou_model_free(model: *mut OuModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_model_constants(
    model: *const OuModel,
    out: *mut OuDerivedConstants,
) -> OuStatus {
    guard(|| {
        let m = deref(model)?;
        let out = non_null(out)?;
        let dc = m.0.derived_constants();
        *out = OuDerivedConstants {
            r: dc.r,
            c: dc.c,
            ep: dc.ep,
            lambda_lo: dc.lambda_lo,
            lambda_hi: dc.lambda_hi,
        };
        Ok(())
    })
}

unsafe fn scalar(
    model: *const OuModel,
    out: *mut f64,
    f: impl FnOnce(&Model) -> ou_epr::Result<f64>,
) -> OuStatus {
    guard(|| {
        let m = deref(model)?;
        let out = non_null(out)?;
        *out = check(f(&m.0))?;
        Ok(())
    })
}

/// Large-time Cramér function `Λ(λ)`; `+inf` outside its domain.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_cramer(model: *const OuModel, lambda: f64, out: *mut f64) -> OuStatus {
    scalar(model, out, |m| Ok(cramer(m, lambda).value))
}

/// `Λ(λ)` by numerical quadrature of the spectral integral.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_cramer_quadrature(
    model: *const OuModel,
    lambda: f64,
    out: *mut f64,
) -> OuStatus {
    scalar(model, out, |m| {
        cramer_quadrature(m, lambda).map(|e| e.value)
    })
}

/// Finite-horizon `Λ_T(λ)` from the eigenvalue product; `+inf` when the
/// exponential moment diverges.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_lambda_finite_t(
    model: *const OuModel,
    lambda: f64,
    horizon: f64,
    n_terms: usize,
    out: *mut f64,
) -> OuStatus {
    scalar(model, out, |m| {
        lambda_finite_t(m, lambda, horizon, n_terms).map(|e| e.value)
    })
}

/// Rate function `I(x)` from the explicit formula.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_rate(model: *const OuModel, x: f64, out: *mut f64) -> OuStatus {
    scalar(model, out, |m| Ok(rate_paper(m, x).value))
}

/// Rate function `I(x)` as the numerical Legendre transform of `Λ`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_rate_legendre(
    model: *const OuModel,
    x: f64,
    out: *mut f64,
) -> OuStatus {
    scalar(model, out, |m| rate_legendre(m, x).map(|e| e.value))
}

/// First `count` eigenvalues of the covariance operator on `[0, horizon]`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_new(
    model: *const OuModel,
    horizon: f64,
    count: usize,
    out: *mut *mut OuSpectrum,
) -> OuStatus {
    guard(|| {
        let m = deref(model)?;
        let out = non_null(out)?;
        let kernel = check(Kernel::from_drift(&m.0.drift(), horizon))?;
        let spec = check(eigenvalues(&kernel, count))?;
        *out = Box::into_raw(Box::new(OuSpectrum(spec)));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be NULL or a handle from [`ou_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_free(spectrum: *mut OuSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of eigenvalues held, or 0 for NULL.
///
/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_len(spectrum: *const OuSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Copies `min(len, capacity)` eigenvalues, largest first, into `buf` and
/// stores the number written in `written`.
///
/// # Safety
/// `spectrum` must be a live handle, `buf` must hold `capacity` doubles and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_gammas(
    spectrum: *const OuSpectrum,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> OuStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let written = non_null(written)?;
        let n = capacity.min(s.0.len());
        if n > 0 {
            ptr::copy_nonoverlapping(s.0.gammas.as_ptr(), non_null(buf)?, n);
        }
        *written = n;
        Ok(())
    })
}

/// Root `ω` generating eigenvalue `j` (1-based).
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_omega(
    spectrum: *const OuSpectrum,
    j: usize,
    out: *mut f64,
) -> OuStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let out = non_null(out)?;
        if j == 0 || j > s.0.len() {
            set_error(format!("eigen index {j} outside 1..={}", s.0.len()));
            return Err(OuStatus::InvalidArgument);
        }
        *out = s.0.roots[j - 1].omega;
        Ok(())
    })
}

/// Total trace estimate: the held eigenvalues plus the analytic tail.
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ou_spectrum_trace(spectrum: *const OuSpectrum, out: *mut f64) -> OuStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let out = non_null(out)?;
        *out = s.0.trace_estimate().total();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_mapping() {
        assert_eq!(
            status_of(&Error::DegenerateTheta),
            OuStatus::InvalidArgument
        );
        assert_eq!(
            status_of(&Error::Domain {
                value: 1.0,
                what: "x"
            }),
            OuStatus::Domain
        );
        assert_eq!(status_of(&Error::SchemeMismatch), OuStatus::Computation);
    }

    #[test]
    fn error_message_is_thread_local() {
        let mut m = ptr::null_mut();
        assert_eq!(
            unsafe { ou_model_new(0.0, &mut m) },
            OuStatus::InvalidArgument
        );
        assert!(m.is_null());
        let msg = unsafe { CStr::from_ptr(ou_last_error_message()) };
        assert!(!msg.to_bytes().is_empty());
        let other = std::thread::spawn(|| ou_last_error_message().is_null())
            .join()
            .unwrap();
        assert!(other);
    }
}
