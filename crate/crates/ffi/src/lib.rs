//! C interface to `finslerlab`.
//!
//! Metrics are opaque handles created by `fl_metric_new` or `fl_metric_polydisk`
//! and released with `fl_metric_free`. Every fallible call returns an
//! `FlStatus`; the message of the last failure on the calling thread is
//! available through `fl_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finslerlab::curvature::{curvature_bounds, sectional_curvature};
use finslerlab::geodesics::polydisk_distance;
use finslerlab::{ComplexFinslerMetric, Error, FactorKind, FactorMetric, MetricParams, ProductManifold, ProductMetric};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    ZeroSection = 4,
    Singular = 5,
    BoundaryExit = 6,
    Config = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlFactorKind {
    PoincareDisk = 0,
    BergmanBall = 1,
    FubiniStudy = 2,
    EuclideanFlat = 3,
}

impl From<FlFactorKind> for FactorKind {
    fn from(k: FlFactorKind) -> Self {
        match k {
            FlFactorKind::PoincareDisk => FactorKind::PoincareDisk,
            FlFactorKind::BergmanBall => FactorKind::BergmanBall,
            FlFactorKind::FubiniStudy => FactorKind::FubiniStudy,
            FlFactorKind::EuclideanFlat => FactorKind::EuclideanFlat,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlFactor {
    pub kind: FlFactorKind,
    pub dim: usize,
}

/// Opaque handle to `F_{t,k}` on a product manifold.
pub struct FlMetric {
    inner: ProductMetric,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FlStatus {
    match e {
        Error::InvalidInput(_) => FlStatus::InvalidInput,
        Error::Domain { .. } => FlStatus::Domain,
        Error::ZeroSection => FlStatus::ZeroSection,
        Error::SingularUpdate(_) | Error::Singular(_) => FlStatus::Singular,
        Error::BoundaryExit { .. } => FlStatus::BoundaryExit,
        Error::Config(_) => FlStatus::Config,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            FlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FlStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn complex_vec(p: *const FlComplex, n: usize, what: &'static str) -> Result<Vec<Complex64>, Failure> {
    Ok(slice(p, n, what)?.iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn metric<'a>(m: *const FlMetric) -> Result<&'a ProductMetric, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or(Failure::Null("metric"))
}

/// Creates `F_{t,k}` on the product of `n_factors` factors.
///
/// # Safety
/// `factors` must point to `n_factors` entries and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_new(
    factors: *const FlFactor,
    n_factors: usize,
    t: f64,
    k: u32,
    out: *mut *mut FlMetric,
) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let specs = slice(factors, n_factors, "factors")?;
        let fs = specs
            .iter()
            .map(|f| FactorMetric::new(f.kind.into(), f.dim))
            .collect::<Result<Vec<_>, _>>()?;
        let inner = ProductMetric::new(ProductManifold::new(fs)?, MetricParams::new(t, k)?);
        write(out, Box::into_raw(Box::new(FlMetric { inner })), "out")
    })
}

/// Creates `F_{t,k}` on the polydisk of dimension `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_polydisk(n: usize, t: f64, k: u32, out: *mut *mut FlMetric) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = ProductMetric::new(ProductManifold::polydisk(n)?, MetricParams::new(t, k)?);
        write(out, Box::into_raw(Box::new(FlMetric { inner })), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `m` must come from `fl_metric_new` or `fl_metric_polydisk` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_free(m: *mut FlMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Complex dimension of the manifold, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_dim(m: *const FlMetric) -> usize {
    m.as_ref().map_or(0, |m| m.inner.manifold().dim())
}

/// `F_{t,k}(z, v)`.
///
/// # Safety
/// `z` and `v` must point to `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_value(
    m: *const FlMetric,
    z: *const FlComplex,
    v: *const FlComplex,
    n: usize,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let m = metric(m)?;
        let value = m.metric_value(&complex_vec(z, n, "z")?, &complex_vec(v, n, "v")?)?;
        write(out, value, "out")
    })
}

/// Complex fundamental tensor `G_{αβ̄}` written row-major into `out` (`n * n` entries).
///
/// # Safety
/// `z` and `v` must point to `n` entries and `out` to `n * n` writable entries.
#[no_mangle]
pub unsafe extern "C" fn fl_complex_tensor(
    m: *const FlMetric,
    z: *const FlComplex,
    v: *const FlComplex,
    n: usize,
    out: *mut FlComplex,
) -> FlStatus {
    guard(|| {
        let m = metric(m)?;
        let h = m.complex_tensor(&complex_vec(z, n, "z")?, &complex_vec(v, n, "v")?)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (i, c) in h.matrix().as_slice().iter().enumerate() {
            out.add(i).write(FlComplex { re: c.re, im: c.im });
        }
        Ok(())
    })
}

/// Holomorphic sectional curvature at `(z, v)`.
///
/// # Safety
/// `z` and `v` must point to `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_sectional_curvature(
    m: *const FlMetric,
    z: *const FlComplex,
    v: *const FlComplex,
    n: usize,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let m = metric(m)?;
        let k = sectional_curvature(m, &complex_vec(z, n, "z")?, &complex_vec(v, n, "v")?)?;
        write(out, k, "out")
    })
}

/// Range of the holomorphic sectional curvature for `n` factors of curvature `c`.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_curvature_bounds(c: f64, n: usize, t: f64, k: u32, lo: *mut f64, hi: *mut f64) -> FlStatus {
    guard(|| {
        let b = curvature_bounds(c, n, MetricParams::new(t, k)?)?;
        write(lo, b.lo, "lo")?;
        write(hi, b.hi, "hi")
    })
}

/// Invariant distance of `F_{t,k}` between two points of the polydisk.
///
/// # Safety
/// `z1` and `z2` must point to `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polydisk_distance(
    t: f64,
    k: u32,
    z1: *const FlComplex,
    z2: *const FlComplex,
    n: usize,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let d = polydisk_distance(
            MetricParams::new(t, k)?,
            &complex_vec(z1, n, "z1")?,
            &complex_vec(z2, n, "z2")?,
        )?;
        write(out, d.value, "out")
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn fl_status_string(status: FlStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FlStatus::Ok => b"ok\0",
        FlStatus::NullPointer => b"null pointer\0",
        FlStatus::InvalidInput => b"invalid input\0",
        FlStatus::Domain => b"point outside the domain\0",
        FlStatus::ZeroSection => b"zero tangent vector\0",
        FlStatus::Singular => b"singular matrix\0",
        FlStatus::BoundaryExit => b"geodesic left the domain\0",
        FlStatus::Config => b"configuration error\0",
        FlStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}
