//! C interface to `steklov-core`.
//!
//! Maps and spectra are exposed as opaque handles created by `stk_*_new`
//! style constructors and released with the matching `*_free` function.
//! Every fallible call returns a [`StkStatus`]; on failure the message is
//! available from [`stk_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use steklov_core::cli::exit_code;
use steklov_core::lift::{analyze_pair, assign_symmetry};
use steklov_core::rational_map::{ps3_instance, RationalMap};
use steklov_core::spectral::{eigenfunction_eval, solve, SpectralProblem, Spectrum};
use steklov_core::Error;

/// Result codes. The nonzero values match the exit codes of the command line
/// tool, plus two codes specific to the C boundary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    InvariantViolation = 4,
    IndexOutOfRange = 5,
    Panic = 6,
}

/// Opaque rational map handle.
pub struct StkMap {
    inner: RationalMap,
}

/// Opaque spectrum handle. Holds the map it was computed from.
pub struct StkSpectrum {
    map: RationalMap,
    inner: Spectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> StkStatus {
    match exit_code(e) {
        2 => StkStatus::InvalidInput,
        4 => StkStatus::InvariantViolation,
        _ => StkStatus::NumericalFailure,
    }
}

fn guard<F: FnOnce() -> Result<(), (StkStatus, String)>>(f: F) -> StkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StkStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            StkStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (StkStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (StkStatus, String) {
    (StkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (StkStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_err(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn stk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds R = P/Q from ascending coefficient arrays.
///
/// # Safety
/// `num` and `den` must point to `num_len` and `den_len` readable doubles,
/// and `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn stk_map_new(
    num: *const f64,
    num_len: usize,
    den: *const f64,
    den_len: usize,
    out: *mut *mut StkMap,
) -> StkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let p = slice(num, num_len, "num")?.to_vec();
        let q = slice(den, den_len, "den")?.to_vec();
        let inner = RationalMap::new(p, q).map_err(core_err)?;
        *out = Box::into_raw(Box::new(StkMap { inner }));
        Ok(())
    })
}

/// Builds the quadratic map x + (x² − 1)/(2C) for C > 1.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn stk_map_quadratic(c: f64, out: *mut *mut StkMap) -> StkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let inner = RationalMap::quadratic(c).map_err(core_err)?;
        *out = Box::into_raw(Box::new(StkMap { inner }));
        Ok(())
    })
}

/// Builds a degree-three map of the supported component from the modulus
/// `a` and a window `(f0, f1)` inside (0, 1).
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn stk_map_ps3(a: f64, f0: f64, f1: f64, out: *mut *mut StkMap) -> StkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let inner = ps3_instance(a, (f0, f1)).map_err(core_err)?;
        *out = Box::into_raw(Box::new(StkMap { inner }));
        Ok(())
    })
}

/// Degree of the map.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stk_map_degree(map: *const StkMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.degree())
}

/// Evaluates R(x). A pole yields infinity.
///
/// # Safety
/// `map` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_map_eval(map: *const StkMap, x: f64, out: *mut f64) -> StkStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null_err("map"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = m.inner.eval_real(x);
        Ok(())
    })
}

/// Releases a map handle. Null is accepted.
///
/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stk_map_free(map: *mut StkMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Solves the Galerkin problem of size `n` and classifies every pair as
/// symmetric or antisymmetric.
///
/// # Safety
/// `map` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_solve(map: *const StkMap, n: usize, out: *mut *mut StkSpectrum) -> StkStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null_err("map"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let problem = SpectralProblem::new(m.inner.clone(), n).map_err(core_err)?;
        let mut inner = solve(&problem).map_err(core_err)?;
        if m.inner.degree() > 1 {
            assign_symmetry(&m.inner, &mut inner);
        }
        *out = Box::into_raw(Box::new(StkSpectrum { map: m.inner.clone(), inner }));
        Ok(())
    })
}

/// Number of real eigenpairs, converged or not.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_len(s: *const StkSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.inner.pairs.len())
}

/// Whether the truncation flagged a convergence warning.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_convergence_warning(s: *const StkSpectrum) -> bool {
    s.as_ref().is_some_and(|s| s.inner.convergence_warning)
}

unsafe fn pair_index<'a>(
    s: *const StkSpectrum,
    index: usize,
) -> Result<(&'a StkSpectrum, &'a steklov_core::spectral::EigenPair), (StkStatus, String)> {
    let s = s.as_ref().ok_or_else(|| null_err("spectrum"))?;
    let p = s
        .inner
        .pairs
        .get(index)
        .ok_or_else(|| (StkStatus::IndexOutOfRange, format!("pair index {index} out of range")))?;
    Ok((s, p))
}

/// Eigenvalue of pair `index`.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_lambda(s: *const StkSpectrum, index: usize, out: *mut f64) -> StkStatus {
    guard(|| {
        let (_, p) = pair_index(s, index)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = p.lambda;
        Ok(())
    })
}

/// Symmetry class of pair `index`: 1 antisymmetric, 0 symmetric, −1
/// unclassified.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_symmetry(s: *const StkSpectrum, index: usize, out: *mut i32) -> StkStatus {
    use steklov_core::spectral::Symmetry;
    guard(|| {
        let (_, p) = pair_index(s, index)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = match p.symmetry {
            Symmetry::Antisymmetric => 1,
            Symmetry::Symmetric => 0,
            Symmetry::Unclassified => -1,
        };
        Ok(())
    })
}

/// Copies up to `cap` Chebyshev coefficients of pair `index` into `buf` and
/// stores the full count in `len`. Passing `cap = 0` queries the length.
///
/// # Safety
/// `buf` must hold `cap` doubles, `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_coefficients(
    s: *const StkSpectrum,
    index: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> StkStatus {
    guard(|| {
        let (_, p) = pair_index(s, index)?;
        if len.is_null() {
            return Err(null_err("len"));
        }
        *len = p.coefficients.len();
        if cap > 0 {
            if buf.is_null() {
                return Err(null_err("buf"));
            }
            let k = cap.min(p.coefficients.len());
            ptr::copy_nonoverlapping(p.coefficients.as_ptr(), buf, k);
        }
        Ok(())
    })
}

/// Evaluates eigenfunction `index` at `x` in [−1, 1].
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_eval(s: *const StkSpectrum, index: usize, x: f64, out: *mut f64) -> StkStatus {
    guard(|| {
        let (_, p) = pair_index(s, index)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        if !(-1.0..=1.0).contains(&x) {
            return Err((StkStatus::InvalidInput, format!("x = {x} outside [-1, 1]")));
        }
        *out = eigenfunction_eval(p, x);
        Ok(())
    })
}

/// Runs the full monodromy analysis on pair `index` and returns it as a JSON
/// document in `*json`, to be released with [`stk_string_free`]. A report
/// whose invariant checks fail is still returned, with status
/// `INVARIANT_VIOLATION`.
///
/// # Safety
/// `s` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_analyze(
    s: *const StkSpectrum,
    index: usize,
    json: *mut *mut c_char,
) -> StkStatus {
    guard(|| {
        let (s, p) = pair_index(s, index)?;
        if json.is_null() {
            return Err(null_err("json"));
        }
        let analysis = analyze_pair(&s.map, p).map_err(core_err)?;
        let text = steklov_core::io::to_json_string(&analysis).map_err(core_err)?;
        *json = CString::new(text).unwrap_or_default().into_raw();
        if analysis.passed() {
            Ok(())
        } else {
            Err((StkStatus::InvariantViolation, format!("failed checks: {}", analysis.failed_checks().join(", "))))
        }
    })
}

/// Releases a spectrum handle. Null is accepted.
///
/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stk_spectrum_free(s: *mut StkSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes the three real moduli of the pants decomposition of `map` into
/// `out[0..3]`.
///
/// # Safety
/// `map` must be a live handle and `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn stk_pants_moduli(map: *const StkMap, out: *mut f64) -> StkStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null_err("map"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let pants = steklov_core::pants::pants_of(&m.inner).map_err(core_err)?;
        let t = steklov_core::pants::moduli(&pants);
        ptr::copy_nonoverlapping(t.0.as_ptr(), out, 3);
        Ok(())
    })
}

/// Releases a string returned by this library. Null is accepted.
///
/// # Safety
/// `s` must be null or a string obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
