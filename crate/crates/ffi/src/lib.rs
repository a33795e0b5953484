//! C interface to `radar_sg`.
//!
//! Scenarios live behind an opaque [`RsgScenario`] handle. Every function
//! returns an [`RsgStatus`]; on failure the message is kept per thread and
//! can be read with [`rsg_last_error_message`]. Output arrays are owned by
//! the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use radar_sg::cli::{parse_scenario, REFERENCE_JSON};
use radar_sg::interference::{interference_cdf, mean_interference};
use radar_sg::montecarlo::{interference_samples, McConfig, Parallelism};
use radar_sg::performance::{optimal_duty_cycle, p_success_ranges, solve_z0};
use radar_sg::{Error, Scenario};

/// Result of every call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsgStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed JSON or a field the schema does not know.
    Schema = 2,
    /// A parameter outside its domain.
    InvalidArgument = 3,
    /// Quadrature, inversion or root finding failed.
    Numerical = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque scenario handle.
pub struct RsgScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsgStatus {
    match e {
        Error::Schema(_) => RsgStatus::Schema,
        Error::Invalid { .. } | Error::Domain { .. } | Error::Regime { .. } | Error::Overlap { .. } => {
            RsgStatus::InvalidArgument
        }
        Error::Io(_) => RsgStatus::Io,
        _ => RsgStatus::Numerical,
    }
}

/// Runs `f`, records any error and turns panics into `Panic`.
fn guard<F: FnOnce() -> Result<(), (RsgStatus, String)>>(f: F) -> RsgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            RsgStatus::Panic
        }
    }
}

fn lib<T>(r: radar_sg::Result<T>) -> Result<T, (RsgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RsgStatus, String) {
    (RsgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn scenario_ref<'a>(s: *const RsgScenario) -> Result<&'a Scenario, (RsgStatus, String)> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("scenario"))
}

unsafe fn input<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (RsgStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], (RsgStatus, String)> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rsg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a scenario from NUL-terminated JSON (same schema as the CLI).
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_scenario_from_json(json: *const c_char, out: *mut *mut RsgScenario) -> RsgStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (RsgStatus::Schema, e.to_string()))?;
        let inner = lib(parse_scenario(text))?;
        *out = Box::into_raw(Box::new(RsgScenario { inner }));
        Ok(())
    })
}

/// The bundled reference scenario.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_scenario_reference(out: *mut *mut RsgScenario) -> RsgStatus {
    rsg_scenario_from_json(CString::new(REFERENCE_JSON).unwrap_or_default().as_ptr(), out)
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsg_scenario_free(s: *mut RsgScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// E[I] [W].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rsg_mean_interference(s: *const RsgScenario, out: *mut f64) -> RsgStatus {
    guard(|| {
        let s = scenario_ref(s)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(mean_interference(s))?;
        Ok(())
    })
}

/// F_I at `n` strictly increasing points `x` [W]. `tolerance` (may be NULL)
/// receives the accuracy claimed for each value.
///
/// # Safety
/// `x` and `cdf` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rsg_interference_cdf(
    s: *const RsgScenario,
    x: *const f64,
    n: usize,
    cdf: *mut f64,
    tolerance: *mut f64,
) -> RsgStatus {
    guard(|| {
        let s = scenario_ref(s)?;
        let x = input(x, n, "x")?;
        let cdf = output(cdf, n, "cdf")?;
        let curve = lib(interference_cdf(s, x))?;
        cdf.copy_from_slice(&curve.cdf);
        if let Some(t) = tolerance.as_mut() {
            *t = curve.tolerance;
        }
        Ok(())
    })
}

/// Ranging success probability at `n` ranges [m]. `tolerance` (may be
/// NULL) receives the absolute accuracy of the values.
///
/// # Safety
/// `ranges` and `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rsg_p_success(
    s: *const RsgScenario,
    ranges: *const f64,
    n: usize,
    out: *mut f64,
    tolerance: *mut f64,
) -> RsgStatus {
    guard(|| {
        let s = scenario_ref(s)?;
        let r = input(ranges, n, "ranges")?;
        let out = output(out, n, "out")?;
        let (p, tol) = lib(p_success_ranges(s, r))?;
        out.copy_from_slice(&p);
        if let Some(t) = tolerance.as_mut() {
            *t = tol;
        }
        Ok(())
    })
}

/// Duty cycle maximizing spatial success on the first lane at range `r` [m].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rsg_optimal_duty_cycle(s: *const RsgScenario, range_m: f64, xi_star: *mut f64) -> RsgStatus {
    guard(|| {
        let s = scenario_ref(s)?;
        let out = xi_star.as_mut().ok_or_else(|| null("xi_star"))?;
        let consts = lib(s.derive(0))?;
        *out = lib(optimal_duty_cycle(&s.lanes[0], &consts, range_m))?.xi_star;
        Ok(())
    })
}

/// Root z₀ of erfc(z) = 2z e^{-z²}/√π.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rsg_z0(tol: f64, out: *mut f64) -> RsgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(solve_z0(tol))?;
        Ok(())
    })
}

/// Monte-Carlo aggregate interference, one sample per replicate, written to
/// `samples[0..replicates]`. `threads == 0` uses every core; the samples do
/// not depend on it.
///
/// # Safety
/// `samples` must hold `replicates` values.
#[no_mangle]
pub unsafe extern "C" fn rsg_mc_interference(
    s: *const RsgScenario,
    replicates: usize,
    seed: u64,
    window_m: f64,
    threads: usize,
    samples: *mut f64,
) -> RsgStatus {
    guard(|| {
        let s = scenario_ref(s)?;
        let out = output(samples, replicates, "samples")?;
        let mc = McConfig {
            replicates,
            window: window_m,
            master_seed: seed,
            parallelism: if threads == 0 { Parallelism::Auto } else { Parallelism::Threads(threads) },
        };
        out.copy_from_slice(&lib(interference_samples(s, &mc))?);
        Ok(())
    })
}
