//! C ABI over the `twostar` library.
//!
//! Every fallible function returns a [`TwostarStatus`] and writes results
//! through out-pointers. On failure the message is available from
//! [`twostar_last_error`] until the next failing call on the same thread.
//! Exact systems are opaque handles released with [`twostar_system_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twostar::inequalities;
use twostar::mcmc::{run_chains, ChainSpec};
use twostar::meanfield::{self, Classification};
use twostar::{Error, ExactSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwostarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    Undefined = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwostarPhase {
    Unique = 0,
    Coexistence = 1,
    Critical = 2,
}

/// Opaque exact-enumeration system.
pub struct TwostarSystem(ExactSystem);

/// Mean-field classification of one `(alpha, h)` point. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TwostarPhasePoint {
    pub n_roots: usize,
    pub u_star_1: f64,
    pub u_star_2: f64,
    pub phase: TwostarPhase,
    pub variance: f64,
}

/// Glauber run settings. `burn_in` and `thinning` count sweeps.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TwostarChainSpec {
    pub n: usize,
    pub alpha: f64,
    pub h: f64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub chains: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TwostarChainSummary {
    pub density_mean: f64,
    pub density_se: f64,
    pub edge_probability_mean: f64,
    pub edge_probability_se: f64,
    pub wedge_count_mean: f64,
    pub wedge_count_se: f64,
    pub standardized_variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TwostarStatus {
    match e {
        Error::EnumerationCap { .. } | Error::SizeCap { .. } => TwostarStatus::CapExceeded,
        Error::CurveUndefined(_) | Error::VarianceUndefined { .. } => TwostarStatus::Undefined,
        _ => TwostarStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> TwostarStatus
where
    F: FnOnce() -> Result<(), TwostarStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TwostarStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            TwostarStatus::Panic
        }
    }
}

fn lib<T>(r: twostar::Result<T>) -> Result<T, TwostarStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> TwostarStatus {
    set_error(format!("{what} is null"));
    TwostarStatus::NullPointer
}

/// Borrows a caller array; a null pointer is accepted when `len` is zero.
///
/// # Safety
/// `ptr` must point to `len` readable values when non-null.
unsafe fn slice<'a>(ptr: *const usize, len: usize, what: &str) -> Result<&'a [usize], TwostarStatus> {
    if len == 0 {
        Ok(&[])
    } else if ptr.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(ptr, len))
    }
}

/// # Safety
/// `out` must be null or valid for a write.
unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), TwostarStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn system<'a>(s: *const TwostarSystem) -> Result<&'a ExactSystem, TwostarStatus> {
    // SAFETY: handles come from twostar_system_new and are live until freed.
    unsafe { s.as_ref() }.map(|s| &s.0).ok_or_else(|| null("system"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn twostar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn twostar_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Creates a scalar two-star system on `n` vertices.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_new(
    n: usize,
    alpha: f64,
    h: f64,
    out: *mut *mut TwostarSystem,
) -> TwostarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = lib(ExactSystem::scalar(n, alpha, h))?;
        out.write(Box::into_raw(Box::new(TwostarSystem(sys))));
        Ok(())
    })
}

/// Creates an ERGM system with edge and triangle terms.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_new_edge_triangle(
    n: usize,
    beta1: f64,
    beta2: f64,
    out: *mut *mut TwostarSystem,
) -> TwostarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = lib(ExactSystem::new(
            n,
            twostar::ErgmParams::edge_triangle(beta1, beta2),
        ))?;
        out.write(Box::into_raw(Box::new(TwostarSystem(sys))));
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from a constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_free(sys: *mut TwostarSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of edge variables `n(n-1)/2`.
///
/// # Safety
/// `sys` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_edges(sys: *const TwostarSystem, out: *mut usize) -> TwostarStatus {
    guard(|| write(out, system(sys)?.m(), "out"))
}

/// # Safety
/// `sys` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_log_partition(
    sys: *const TwostarSystem,
    out: *mut f64,
) -> TwostarStatus {
    guard(|| write(out, system(sys)?.log_partition(), "out"))
}

/// `E[prod_{e in edges} x_e]`. Edge ids are lexicographic pair indices.
///
/// # Safety
/// `edges` must hold `len` values; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_expect_monomial(
    sys: *const TwostarSystem,
    edges: *const usize,
    len: usize,
    out: *mut f64,
) -> TwostarStatus {
    guard(|| {
        let s = system(sys)?;
        let e = slice(edges, len, "edges")?;
        write(out, lib(s.expect_monomial(e))?, "out")
    })
}

/// Ursell function of order `len` (1 to 3) at the given edge ids.
///
/// # Safety
/// `edges` must hold `len` values; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_ursell(
    sys: *const TwostarSystem,
    edges: *const usize,
    len: usize,
    out: *mut f64,
) -> TwostarStatus {
    guard(|| {
        let s = system(sys)?;
        let e = slice(edges, len, "edges")?;
        write(out, lib(inequalities::ursell(s, e))?.value, "out")
    })
}

/// Exhaustive GHS check; writes the largest `u3` and whether it is within slack.
///
/// # Safety
/// `worst` and `pass` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_verify_ghs(
    sys: *const TwostarSystem,
    worst: *mut f64,
    pass: *mut bool,
) -> TwostarStatus {
    guard(|| {
        let r = inequalities::verify_ghs_exhaustive(system(sys)?);
        write(worst, r.worst_violation, "worst")?;
        write(pass, r.passed(), "pass")
    })
}

/// Exhaustive GKS check over subsets of size at most `max_size`.
///
/// # Safety
/// `worst` and `pass` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn twostar_system_verify_gks(
    sys: *const TwostarSystem,
    max_size: usize,
    worst: *mut f64,
    pass: *mut bool,
) -> TwostarStatus {
    guard(|| {
        let r = inequalities::verify_gks_exhaustive(system(sys)?, max_size);
        write(worst, r.worst_violation, "worst")?;
        write(pass, r.passed(), "pass")
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_meanfield_classify(
    alpha: f64,
    h: f64,
    out: *mut TwostarPhasePoint,
) -> TwostarStatus {
    guard(|| {
        if !alpha.is_finite() || !h.is_finite() {
            set_error(format!("non-finite parameters ({alpha}, {h})"));
            return Err(TwostarStatus::InvalidArgument);
        }
        let p = meanfield::classify(alpha, h);
        let phase = match p.classification {
            Classification::Unique => TwostarPhase::Unique,
            Classification::Coexistence => TwostarPhase::Coexistence,
            Classification::Critical => TwostarPhase::Critical,
        };
        let point = TwostarPhasePoint {
            n_roots: p.roots.len(),
            u_star_1: p.maximizers[0],
            u_star_2: p.maximizers.get(1).copied().unwrap_or(f64::NAN),
            phase,
            variance: p.variance().unwrap_or(f64::NAN),
        };
        write(out, point, "out")
    })
}

/// Field `q(alpha)` on the coexistence curve, for `alpha > 2`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_meanfield_critical_curve(alpha: f64, out: *mut f64) -> TwostarStatus {
    guard(|| write(out, lib(meanfield::critical_curve(alpha))?.q, "out"))
}

/// Runs independent Glauber chains and summarizes the edge statistics.
///
/// # Safety
/// `spec` must be readable; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn twostar_mcmc_run(
    spec: *const TwostarChainSpec,
    out: *mut TwostarChainSummary,
) -> TwostarStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let cs = lib(ChainSpec::new(s.n, s.alpha, s.h, s.sweeps, s.chains, s.seed)
            .and_then(|c| c.with_burn_in(s.burn_in))
            .and_then(|c| c.with_thinning(s.thinning)))?;
        let r = lib(run_chains(&cs))?;
        let summary = TwostarChainSummary {
            density_mean: r.density.mean,
            density_se: r.density.se,
            edge_probability_mean: r.edge_probability.mean,
            edge_probability_se: r.edge_probability.se,
            wedge_count_mean: r.wedge_count.mean,
            wedge_count_se: r.wedge_count.se,
            standardized_variance: r.standardized_variance,
            skewness: r.skewness,
            excess_kurtosis: r.excess_kurtosis,
        };
        write(out, summary, "out")
    })
}
