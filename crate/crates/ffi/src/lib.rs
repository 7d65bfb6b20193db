//! C ABI for `evcopula`.
//!
//! Copulas are opaque [`EvcCopula`] handles created by the `evc_copula_*`
//! constructors and released with [`evc_copula_free`]. Every function returns
//! an [`EvcStatus`]; results go through caller-provided out-pointers, which
//! are left untouched on failure.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use evcopula::bounds::{rho_bounds, tau_bounds};
use evcopula::coefficients::coefficient_set;
use evcopula::copula::EvCopula;
use evcopula::montecarlo::{sample_generic, sample_mo, SampleBatch};
use evcopula::pickands::{
    gumbel_dependence, mo_dependence, pareto_dependence, piecewise_linear_dependence,
    DependenceFunction,
};
use evcopula::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvcStatus {
    Ok = 0,
    NullPointer = 1,
    ParamOutOfRange = 2,
    InvalidDependence = 3,
    NonConvergent = 4,
    Numerical = 5,
    DegenerateSample = 6,
    Panic = 7,
}

impl From<&Error> for EvcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ParamOutOfRange { .. } => EvcStatus::ParamOutOfRange,
            Error::InvalidDependenceFunction(_) => EvcStatus::InvalidDependence,
            Error::NonConvergent { .. } => EvcStatus::NonConvergent,
            Error::DegenerateSample(_) => EvcStatus::DegenerateSample,
            _ => EvcStatus::Numerical,
        }
    }
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn evc_status_message(status: EvcStatus) -> *const c_char {
    let s: &'static CStr = match status {
        EvcStatus::Ok => c"ok",
        EvcStatus::NullPointer => c"null pointer argument",
        EvcStatus::ParamOutOfRange => c"parameter out of range",
        EvcStatus::InvalidDependence => c"invalid dependence function",
        EvcStatus::NonConvergent => c"numerical routine did not converge",
        EvcStatus::Numerical => c"numerical error",
        EvcStatus::DegenerateSample => c"degenerate sample",
        EvcStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Opaque extreme value copula.
pub struct EvcCopula {
    inner: EvCopula,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvcCoefficients {
    pub rho: f64,
    pub tau: f64,
    pub lambda: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvcInterval {
    pub lo: f64,
    pub hi: f64,
}

fn guard(f: impl FnOnce() -> Result<(), EvcStatus>) -> EvcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => EvcStatus::Panic,
    }
}

fn lift<T>(r: evcopula::Result<T>) -> Result<T, EvcStatus> {
    r.map_err(|e| EvcStatus::from(&e))
}

unsafe fn handle<'a>(c: *const EvcCopula) -> Result<&'a EvcCopula, EvcStatus> {
    c.as_ref().ok_or(EvcStatus::NullPointer)
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), EvcStatus> {
    if out.is_null() {
        return Err(EvcStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn construct(
    out: *mut *mut EvcCopula,
    make: impl FnOnce() -> evcopula::Result<DependenceFunction>,
) -> EvcStatus {
    guard(|| {
        if out.is_null() {
            return Err(EvcStatus::NullPointer);
        }
        let dep = lift(make())?;
        let boxed = Box::new(EvcCopula {
            inner: EvCopula::new(dep),
        });
        out.write(Box::into_raw(boxed));
        Ok(())
    })
}

/// Marshall-Olkin copula, `0 <= alpha, beta <= 1`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_mo(
    alpha: f64,
    beta: f64,
    out: *mut *mut EvcCopula,
) -> EvcStatus {
    construct(out, || mo_dependence(alpha, beta))
}

/// Gumbel copula, `theta >= 1`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_gumbel(theta: f64, out: *mut *mut EvcCopula) -> EvcStatus {
    construct(out, || gumbel_dependence(theta))
}

/// Pareto bound copula `min(u, v, u^(1-a) v^(1-b))`, `a, b >= 0`, `a + b <= 1`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_pareto(a: f64, b: f64, out: *mut *mut EvcCopula) -> EvcStatus {
    construct(out, || pareto_dependence(a, b))
}

/// Copula with piecewise-linear dependence function through the knots
/// `(t[i], a[i])`.
///
/// # Safety
/// `t` and `a` must each point to `len` readable doubles; `out` must be valid
/// for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_piecewise_linear(
    t: *const f64,
    a: *const f64,
    len: usize,
    out: *mut *mut EvcCopula,
) -> EvcStatus {
    if t.is_null() || a.is_null() {
        return EvcStatus::NullPointer;
    }
    let ts = slice::from_raw_parts(t, len);
    let avals = slice::from_raw_parts(a, len);
    construct(out, || {
        piecewise_linear_dependence(ts.iter().copied().zip(avals.iter().copied()).collect())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `c` must be null or a handle from an `evc_copula_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_free(c: *mut EvcCopula) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Dependence function `A(t)`.
///
/// # Safety
/// `c` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_pickands(c: *const EvcCopula, t: f64, out: *mut f64) -> EvcStatus {
    guard(|| {
        let c = handle(c)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(EvcStatus::ParamOutOfRange);
        }
        store(out, c.inner.dependence().eval(t))
    })
}

fn check_unit(u: f64, v: f64) -> Result<(), EvcStatus> {
    if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(EvcStatus::ParamOutOfRange)
    }
}

/// `C(u, v)`.
///
/// # Safety
/// `c` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_cdf(
    c: *const EvcCopula,
    u: f64,
    v: f64,
    out: *mut f64,
) -> EvcStatus {
    guard(|| {
        let c = handle(c)?;
        check_unit(u, v)?;
        store(out, c.inner.eval(u, v))
    })
}

/// Conditional distribution `dC/du (u, v)`, right-continuous in `v`.
///
/// # Safety
/// `c` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_copula_partial_u(
    c: *const EvcCopula,
    u: f64,
    v: f64,
    out: *mut f64,
) -> EvcStatus {
    guard(|| {
        let c = handle(c)?;
        check_unit(u, v)?;
        store(out, c.inner.partial_u(u, v))
    })
}

/// Spearman's rho, Kendall's tau, upper tail coefficient and Blomqvist's beta.
///
/// # Safety
/// `c` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_coefficients(
    c: *const EvcCopula,
    out: *mut EvcCoefficients,
) -> EvcStatus {
    guard(|| {
        let c = handle(c)?;
        let set = lift(coefficient_set(c.inner.dependence()))?;
        store(
            out,
            EvcCoefficients {
                rho: set.rho.value,
                tau: set.tau.value,
                lambda: set.lambda.value,
                beta: set.beta.value,
            },
        )
    })
}

/// Range of Spearman's rho over extreme value copulas with tail coefficient
/// `lambda`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_rho_bounds(lambda: f64, out: *mut EvcInterval) -> EvcStatus {
    guard(|| {
        let b = lift(rho_bounds(lambda))?;
        store(out, EvcInterval { lo: b.lo, hi: b.hi })
    })
}

/// Range of Kendall's tau over extreme value copulas with tail coefficient
/// `lambda`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn evc_tau_bounds(lambda: f64, out: *mut EvcInterval) -> EvcStatus {
    guard(|| {
        let b = lift(tau_bounds(lambda))?;
        store(out, EvcInterval { lo: b.lo, hi: b.hi })
    })
}

unsafe fn copy_out(batch: SampleBatch, u_out: *mut f64, v_out: *mut f64) -> Result<(), EvcStatus> {
    let n = batch.pairs.len();
    let us = slice::from_raw_parts_mut(u_out, n);
    let vs = slice::from_raw_parts_mut(v_out, n);
    for (i, (u, v)) in batch.pairs.into_iter().enumerate() {
        us[i] = u;
        vs[i] = v;
    }
    Ok(())
}

/// Draws `n` pairs by conditional inversion into `u_out[0..n]` and
/// `v_out[0..n]`. Output is reproducible for a given `seed`.
///
/// # Safety
/// `c` must be a live handle; `u_out` and `v_out` must each be valid for
/// writing `n` doubles and must not overlap.
#[no_mangle]
pub unsafe extern "C" fn evc_sample(
    c: *const EvcCopula,
    n: usize,
    seed: u64,
    u_out: *mut f64,
    v_out: *mut f64,
) -> EvcStatus {
    guard(|| {
        let c = handle(c)?;
        if u_out.is_null() || v_out.is_null() {
            return Err(EvcStatus::NullPointer);
        }
        let batch = lift(sample_generic(&c.inner, n, seed))?;
        copy_out(batch, u_out, v_out)
    })
}

/// Exact Marshall-Olkin sampling from exponential shocks; same buffer
/// contract as [`evc_sample`].
///
/// # Safety
/// `u_out` and `v_out` must each be valid for writing `n` doubles and must
/// not overlap.
#[no_mangle]
pub unsafe extern "C" fn evc_sample_mo(
    alpha: f64,
    beta: f64,
    n: usize,
    seed: u64,
    u_out: *mut f64,
    v_out: *mut f64,
) -> EvcStatus {
    guard(|| {
        if u_out.is_null() || v_out.is_null() {
            return Err(EvcStatus::NullPointer);
        }
        let batch = lift(sample_mo(alpha, beta, n, seed))?;
        copy_out(batch, u_out, v_out)
    })
}

/// Version string of the library, static and NUL-terminated.
#[no_mangle]
pub extern "C" fn evc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
