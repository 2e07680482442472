//! C ABI over `sparseweak`.
//!
//! Objects are opaque heap handles created by `sw_*_new*` and released by
//! the matching `sw_*_free`. Every fallible call returns an [`SwStatus`];
//! results go through out-pointers, which are left untouched on failure.
//! The message of the last failure on the calling thread is available from
//! [`sw_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sparseweak::norms::{lp_norm, weak_norm};
use sparseweak::operators::sparse_apply;
use sparseweak::testing::{bound_thm11, testing_constant};
use sparseweak::weights::{a_infty_char, a_pq_alpha_char, a_pq_char};
use sparseweak::{DyadicCube, Error, ExponentParams, GridFunction, SparseFamily, Weight};

/// Status codes. `SW_STATUS_OK` is zero; the rest mirror the library
/// error classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NonIntegrable = 3,
    Hypothesis = 4,
    DegenerateFit = 5,
    Sparseness = 6,
    Internal = 7,
}

/// Exponent tuple `(d, p, q, alpha, nu)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SwParams {
    pub d: u8,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub nu: f64,
}

pub struct SwWeight(Weight);
pub struct SwFamily(SparseFamily);
pub struct SwFunction(GridFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SwStatus {
    match e {
        Error::NonIntegrable { .. } => SwStatus::NonIntegrable,
        Error::Hypothesis(_) => SwStatus::Hypothesis,
        Error::DegenerateFit(_) => SwStatus::DegenerateFit,
        Error::SparsenessViolation { .. } | Error::OverlappingEsets { .. } => SwStatus::Sparseness,
        _ => SwStatus::InvalidParameter,
    }
}

struct Fail(SwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SwStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SwStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, n) })
}

fn nonnull<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    Ok(())
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    nonnull(out)?;
    unsafe { out.write(v) };
    Ok(())
}

fn params(p: &SwParams) -> Result<ExponentParams, Fail> {
    Ok(ExponentParams::new(p.d, p.p, p.q, p.alpha, p.nu)?)
}

/// Message of the last failure on this thread (empty after a success).
/// Valid until the next `sw_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `p` from the Sobolev relation `1/p = 1/q + alpha/d`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sw_params_sobolev(d: u8, q: f64, alpha: f64, nu: f64, out: *mut SwParams) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let prm = ExponentParams::sobolev(d, q, alpha, nu)?;
        let v = SwParams {
            d,
            p: prm.p(),
            q,
            alpha,
            nu,
        };
        unsafe { put(out, v) }
    })
}

/// Power weight `x^beta` on `[0,1)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sw_weight_new_power(beta: f64, out: *mut *mut SwWeight) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let w = Weight::power(beta)?;
        unsafe { put(out, Box::into_raw(Box::new(SwWeight(w)))) }
    })
}

/// Cell-constant weight from `n = 2^(d depth)` values in row-major order.
///
/// # Safety
/// `values` must point to `n` doubles; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sw_weight_new_grid(
    d: u8,
    depth: u32,
    values: *const f64,
    n: usize,
    out: *mut *mut SwWeight,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let v = unsafe { slice(values, n, "values") }?;
        let w = Weight::grid(GridFunction::new(d, depth, v.to_vec())?)?;
        unsafe { put(out, Box::into_raw(Box::new(SwWeight(w)))) }
    })
}

/// # Safety
/// `w` must be null or a handle from `sw_weight_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_weight_free(w: *mut SwWeight) {
    if !w.is_null() {
        drop(unsafe { Box::from_raw(w) });
    }
}

/// Cell-constant function from `n = 2^(d depth)` values in row-major order.
///
/// # Safety
/// `values` must point to `n` doubles; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sw_function_new(
    d: u8,
    depth: u32,
    values: *const f64,
    n: usize,
    out: *mut *mut SwFunction,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let v = unsafe { slice(values, n, "values") }?;
        let f = GridFunction::new(d, depth, v.to_vec())?;
        unsafe { put(out, Box::into_raw(Box::new(SwFunction(f)))) }
    })
}

/// Number of cells of `f` (0 for a null handle).
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_function_len(f: *const SwFunction) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.len())
}

/// Copies the cell values into `buf`, which must hold `sw_function_len(f)`
/// doubles (`cap` is checked).
///
/// # Safety
/// `f` must be a live handle and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn sw_function_values(f: *const SwFunction, buf: *mut f64, cap: usize) -> SwStatus {
    guard(|| {
        let f = unsafe { get(f, "function") }?;
        let v = f.0.values();
        if cap < v.len() {
            return Err(Fail(
                SwStatus::InvalidParameter,
                format!("buffer holds {cap} values, need {}", v.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        unsafe { ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len()) };
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_function_free(f: *mut SwFunction) {
    if !f.is_null() {
        drop(unsafe { Box::from_raw(f) });
    }
}

/// The tower `{[0, 2^-k) : k = 0..=depth}` (d = 1).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sw_family_new_tower(depth: u32, out: *mut *mut SwFamily) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let s = SparseFamily::tower(depth)?;
        unsafe { put(out, Box::into_raw(Box::new(SwFamily(s)))) }
    })
}

/// Verified sparse family from `n` cubes: `levels[i]` and the `d` indices
/// `indices[i*d .. i*d+d]`. Fails with `SW_STATUS_SPARSENESS` when some
/// cube has `|E_Q| < gamma |Q|`.
///
/// # Safety
/// `levels` must point to `n` values and `indices` to `n*d` values.
#[no_mangle]
pub unsafe extern "C" fn sw_family_new(
    d: u8,
    levels: *const u32,
    indices: *const u64,
    n: usize,
    gamma: f64,
    out: *mut *mut SwFamily,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let lv = unsafe { slice(levels, n, "levels") }?;
        let ix = unsafe { slice(indices, n * d as usize, "indices") }?;
        let cubes = lv
            .iter()
            .enumerate()
            .map(|(i, &k)| DyadicCube::new(k, &ix[i * d as usize..(i + 1) * d as usize]))
            .collect::<Result<Vec<_>, _>>()?;
        let s = SparseFamily::verify(cubes, gamma)?;
        unsafe { put(out, Box::into_raw(Box::new(SwFamily(s)))) }
    })
}

/// Number of cubes (0 for a null handle).
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_family_len(s: *const SwFamily) -> usize {
    unsafe { s.as_ref() }.map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_family_free(s: *mut SwFamily) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// `A_{alpha,nu}^S f` on the cells of `f`; the result is a new handle.
///
/// # Safety
/// Handles must be live; `prm` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_sparse_apply(
    s: *const SwFamily,
    f: *const SwFunction,
    prm: *const SwParams,
    out: *mut *mut SwFunction,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (s, f, p) = unsafe { (get(s, "family")?, get(f, "function")?, get(prm, "params")?) };
        let g = sparse_apply(&s.0, &f.0, &params(p)?)?;
        unsafe { put(out, Box::into_raw(Box::new(SwFunction(g)))) }
    })
}

/// Two-weight characteristic `[w, sigma]_{A_{p,q}^alpha}` over cubes of
/// level `<= depth`.
///
/// # Safety
/// Handles must be live; `prm` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_a_pq_alpha(
    w: *const SwWeight,
    sigma: *const SwWeight,
    prm: *const SwParams,
    depth: u32,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (w, s, p) = unsafe { (get(w, "w")?, get(sigma, "sigma")?, get(prm, "params")?) };
        let v = a_pq_alpha_char(&w.0, &s.0, &params(p)?, depth)?;
        unsafe { put(out, v) }
    })
}

/// One-weight characteristic `[w]_{A_{p,q}}`.
///
/// # Safety
/// `w` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_a_pq(w: *const SwWeight, p: f64, q: f64, depth: u32, out: *mut f64) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let w = unsafe { get(w, "w") }?;
        let v = a_pq_char(&w.0, p, q, depth)?;
        unsafe { put(out, v) }
    })
}

/// Fujii–Wilson `[w]_{A_inf}`.
///
/// # Safety
/// `w` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_a_infty(w: *const SwWeight, depth: u32, out: *mut f64) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let w = unsafe { get(w, "w") }?;
        let v = a_infty_char(&w.0, depth)?;
        unsafe { put(out, v) }
    })
}

/// `||g||_{L^r(w)}`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_lp_norm(g: *const SwFunction, w: *const SwWeight, r: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (g, w) = unsafe { (get(g, "function")?, get(w, "w")?) };
        let v = lp_norm(&g.0, &w.0, r)?;
        unsafe { put(out, v) }
    })
}

/// `||g||_{L^{r,inf}(w)}`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_weak_norm(g: *const SwFunction, w: *const SwWeight, r: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (g, w) = unsafe { (get(g, "function")?, get(w, "w")?) };
        let v = weak_norm(&g.0, &w.0, r)?.value;
        unsafe { put(out, v) }
    })
}

/// Testing constant of the family; needs `p > nu` (`SW_STATUS_HYPOTHESIS`
/// otherwise).
///
/// # Safety
/// Handles must be live; `prm` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_testing_constant(
    s: *const SwFamily,
    w: *const SwWeight,
    sigma: *const SwWeight,
    prm: *const SwParams,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (s, w, sg, p) = unsafe { (get(s, "family")?, get(w, "w")?, get(sigma, "sigma")?, get(prm, "params")?) };
        let v = testing_constant(&s.0, &w.0, &sg.0, &params(p)?)?;
        unsafe { put(out, v) }
    })
}

/// Closed-form two-weight weak-type bound (the active branch).
///
/// # Safety
/// Handles must be live; `prm` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sw_bound_thm11(
    w: *const SwWeight,
    sigma: *const SwWeight,
    prm: *const SwParams,
    depth: u32,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        nonnull(out)?;
        let (w, s, p) = unsafe { (get(w, "w")?, get(sigma, "sigma")?, get(prm, "params")?) };
        let v = bound_thm11(&w.0, &s.0, &params(p)?, depth)?.value;
        unsafe { put(out, v) }
    })
}
