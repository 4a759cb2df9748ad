//! C ABI over `awm-core`.
//!
//! Curves cross the boundary as opaque `AwmCurve` handles that the caller
//! releases with `awm_curve_free`. Every fallible function returns an
//! `AwmStatus`; on failure a human-readable message for the calling thread is
//! available from `awm_last_error_message` until the next failing call.
//! Panics are caught and reported as `AWM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use awm_core::empirical::EmpiricalDistribution;
use awm_core::fitter::{self, ModelFamily, SearchConfig};
use awm_core::gamma;
use awm_core::lorenz::{self, LorenzCurve};
use awm_core::params::{self, ParameterVector};
use awm_core::sam;
use awm_core::solver::{model_lorenz, SolverConfig};
use awm_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwmStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Input = 3,
    Unsupported = 4,
    Infeasible = 5,
    Degenerate = 6,
    Convergence = 7,
    Parse = 8,
    Fit = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Model family selector for `awm_fit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwmFamily {
    Sam = 0,
    EysmRedist = 1,
    EysmFull = 2,
    Awm = 3,
}

impl From<AwmFamily> for ModelFamily {
    fn from(f: AwmFamily) -> Self {
        match f {
            AwmFamily::Sam => ModelFamily::Sam,
            AwmFamily::EysmRedist => ModelFamily::EysmRedist,
            AwmFamily::EysmFull => ModelFamily::EysmFull,
            AwmFamily::Awm => ModelFamily::Awm,
        }
    }
}

/// Opaque Lorenz curve.
pub struct AwmCurve(LorenzCurve);

/// Summary of a fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AwmFitResult {
    pub chi: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub j: f64,
    pub fitted_gini: f64,
    pub empirical_gini: f64,
    pub oligarchy_fraction: f64,
    pub mean_local_error: f64,
    pub evaluations: usize,
    /// 1 when the fitted state holds an oligarchy, 0 otherwise.
    pub supercritical: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> AwmStatus {
    match err {
        Error::Domain(_) => AwmStatus::Domain,
        Error::Input(_) => AwmStatus::Input,
        Error::Unsupported(_) => AwmStatus::Unsupported,
        Error::Infeasible(_) => AwmStatus::Infeasible,
        Error::Degenerate(_) => AwmStatus::Degenerate,
        Error::Convergence { .. } => AwmStatus::Convergence,
        Error::Parse { .. } => AwmStatus::Parse,
        Error::Fit(_) => AwmStatus::Fit,
        Error::Io(_) | Error::Json(_) => AwmStatus::Io,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), AwmStatus>>(body: F) -> AwmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AwmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            AwmStatus::Panic
        }
    }
}

fn fail(err: Error) -> AwmStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(what: &str) -> AwmStatus {
    set_error(format!("{what} is a null pointer"));
    AwmStatus::NullPointer
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), AwmStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_curve(out: *mut *mut AwmCurve, curve: LorenzCurve) -> Result<(), AwmStatus> {
    write_out(out, Box::into_raw(Box::new(AwmCurve(curve))))
}

unsafe fn curve_ref<'a>(c: *const AwmCurve) -> Result<&'a LorenzCurve, AwmStatus> {
    c.as_ref().map(|c| &c.0).ok_or_else(|| null("curve handle"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], AwmStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message describing the calling thread's most recent failure. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn awm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Steady-state Lorenz curve for θ = (χ, ζ, κ) with default solver settings,
/// sampled on `resolution` uniform points.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn awm_model_lorenz(
    chi: f64,
    zeta: f64,
    kappa: f64,
    resolution: usize,
    out: *mut *mut AwmCurve,
) -> AwmStatus {
    guard(|| {
        let theta = ParameterVector::new(chi, zeta, kappa).map_err(fail)?;
        let curve = model_lorenz(&theta, &SolverConfig::default(), resolution).map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// Analytic single-agent-model Lorenz curve.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn awm_sam_lorenz(chi: f64, resolution: usize, out: *mut *mut AwmCurve) -> AwmStatus {
    guard(|| {
        let curve = sam::sam_lorenz_curve(chi, resolution).map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// Curve from explicit points; the regime is inferred from the last value.
///
/// # Safety
/// `f` and `l` must each point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_curve_from_points(
    f: *const f64,
    l: *const f64,
    n: usize,
    out: *mut *mut AwmCurve,
) -> AwmStatus {
    guard(|| {
        let (f, l) = (slice(f, n, "f")?, slice(l, n, "l")?);
        let curve = LorenzCurve::from_points(f.to_vec(), l.to_vec()).map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// Canonical Lorenz ordinates of weighted household records.
///
/// # Safety
/// `weights` and `networth` must each point to `n` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_empirical_lorenz(
    weights: *const f64,
    networth: *const f64,
    n: usize,
    out: *mut *mut AwmCurve,
) -> AwmStatus {
    guard(|| {
        let (w, x) = (slice(weights, n, "weights")?, slice(networth, n, "networth")?);
        let curve = EmpiricalDistribution::from_pairs(w.iter().copied().zip(x.iter().copied()))
            .and_then(|d| d.canonicalize())
            .and_then(|d| d.lorenz_ordinates())
            .map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// Releases a curve handle. Passing null is a no-op.
///
/// # Safety
/// `curve` must be null or a handle obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn awm_curve_free(curve: *mut AwmCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of points of a curve (0 for a null handle).
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn awm_curve_len(curve: *const AwmCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the curve's points into caller buffers of capacity `cap`.
///
/// # Safety
/// `curve` must be a live handle; `f_out` and `l_out` must each have room for
/// `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn awm_curve_points(
    curve: *const AwmCurve,
    f_out: *mut f64,
    l_out: *mut f64,
    cap: usize,
) -> AwmStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        if cap < c.len() {
            set_error(format!("buffer holds {cap} points but the curve has {}", c.len()));
            return Err(AwmStatus::BufferTooSmall);
        }
        if f_out.is_null() || l_out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(c.f().as_ptr(), f_out, c.len());
        ptr::copy_nonoverlapping(c.l().as_ptr(), l_out, c.len());
        Ok(())
    })
}

/// Lorenz value at f = 1, and whether it marks an oligarchy.
///
/// # Safety
/// `curve` must be a live handle; outputs must be writable (either may be null).
#[no_mangle]
pub unsafe extern "C" fn awm_curve_terminal(
    curve: *const AwmCurve,
    terminal: *mut f64,
    supercritical: *mut i32,
) -> AwmStatus {
    guard(|| {
        let c = curve_ref(curve)?;
        if !terminal.is_null() {
            terminal.write(c.terminal());
        }
        if !supercritical.is_null() {
            supercritical.write(c.is_supercritical() as i32);
        }
        Ok(())
    })
}

/// Gini coefficient, 1 − 2∫𝓛 df.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awm_gini(curve: *const AwmCurve, out: *mut f64) -> AwmStatus {
    guard(|| write_out(out, lorenz::gini(curve_ref(curve)?)))
}

/// Supercritical curve (χ/ζ)·𝓛 from the subcritical curve at swapped parameters.
///
/// # Safety
/// `sub` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awm_dual(sub: *const AwmCurve, chi: f64, zeta: f64, out: *mut *mut AwmCurve) -> AwmStatus {
    guard(|| {
        let curve = lorenz::dual_lorenz(curve_ref(sub)?, chi, zeta).map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// AWM curve (1+λ)𝓛 − λf from an EYSM curve, with λ = κ/(1−κ).
///
/// # Safety
/// `eysm` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awm_shift(
    eysm: *const AwmCurve,
    chi: f64,
    zeta: f64,
    kappa: f64,
    out: *mut *mut AwmCurve,
) -> AwmStatus {
    guard(|| {
        let theta = ParameterVector::new(chi, zeta, kappa).map_err(fail)?;
        let curve = lorenz::awm_lorenz(curve_ref(eysm)?, &theta).map_err(fail)?;
        emit_curve(out, curve)
    })
}

/// L1 area between two curves on a uniform grid of `resolution` points.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awm_discrepancy(
    a: *const AwmCurve,
    b: *const AwmCurve,
    resolution: usize,
    out: *mut f64,
) -> AwmStatus {
    guard(|| write_out(out, fitter::discrepancy(curve_ref(a)?, curve_ref(b)?, resolution)))
}

/// Oligarch's share of total wealth, (1+λ)(1 − χ/ζ), or 0 when subcritical.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_oligarchy_fraction(chi: f64, zeta: f64, kappa: f64, out: *mut f64) -> AwmStatus {
    guard(|| {
        let theta = ParameterVector::new(chi, zeta, kappa).map_err(fail)?;
        write_out(out, params::oligarchy_fraction(&theta))
    })
}

/// λ = κ/(1−κ).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_kappa_to_lambda(kappa: f64, out: *mut f64) -> AwmStatus {
    guard(|| write_out(out, params::kappa_to_lambda(kappa).map_err(fail)?))
}

/// Regularized upper incomplete gamma function Q(a, z).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_reg_gamma_q(a: f64, z: f64, out: *mut f64) -> AwmStatus {
    guard(|| write_out(out, gamma::reg_gamma_q(a, z).map_err(fail)?))
}

/// z with Q(a, z) = q.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awm_reg_gamma_q_inv(a: f64, q: f64, out: *mut f64) -> AwmStatus {
    guard(|| write_out(out, gamma::reg_gamma_q_inv(a, q).map_err(fail)?))
}

/// Fits a model family to an empirical curve with the default search settings.
///
/// # Safety
/// `empirical` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awm_fit(family: AwmFamily, empirical: *const AwmCurve, out: *mut AwmFitResult) -> AwmStatus {
    guard(|| {
        let emp = curve_ref(empirical)?;
        let r = fitter::fit(family.into(), emp, &SearchConfig::default()).map_err(fail)?;
        write_out(
            out,
            AwmFitResult {
                chi: r.theta_opt.chi(),
                zeta: r.theta_opt.zeta(),
                kappa: r.theta_opt.kappa(),
                j: r.j_opt,
                fitted_gini: r.fitted_gini,
                empirical_gini: r.empirical_gini,
                oligarchy_fraction: r.oligarchy_fraction,
                mean_local_error: r.mean_local_error,
                evaluations: r.evaluations,
                supercritical: r.model_curve.is_supercritical() as i32,
            },
        )
    })
}
