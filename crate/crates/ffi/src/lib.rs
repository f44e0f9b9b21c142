//! C ABI for `chinpaint`.
//!
//! Every fallible call returns a [`ChStatus`]; on failure the message is
//! available from [`ch_last_error`] on the same thread. Objects are opaque
//! and owned by the caller once returned through an out-pointer; release
//! them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use chinpaint::gpc::PolynomialFamily;
use chinpaint::perturbation::perturbation_variance;
use chinpaint::{
    io, mean_field, monte_carlo, perturbation_mean, run_galerkin, run_inpaint, run_perturbation,
    variance_field, Error, InpaintProblem, ModeStack, NoiseModel, ScalarField, SolverConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    Io = 5,
    Format = 6,
    /// The run finished its step budget above `tol`; outputs are still set.
    NotConverged = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChNoise {
    Gaussian = 0,
    Uniform = 1,
}

/// Time-stepping parameters. Non-positive `c1`/`c2` select the defaults
/// `3/eps` and `lambda0`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChSolverParams {
    pub dt: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_steps: usize,
    pub tol: f64,
}

pub struct ChField(ScalarField);

pub struct ChModeStack(ModeStack);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChStatus {
    match e {
        Error::GridTooSmall { .. }
        | Error::InvalidParameter { .. }
        | Error::OutOfRange { .. }
        | Error::Config { .. } => ChStatus::InvalidArgument,
        Error::LengthMismatch { .. } | Error::DimensionMismatch { .. } => {
            ChStatus::DimensionMismatch
        }
        Error::NonFinite { .. } | Error::NonFiniteSample { .. } => ChStatus::NonFinite,
        Error::Io { .. } => ChStatus::Io,
        Error::Format { .. } => ChStatus::Format,
    }
}

struct Fail(ChStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ChStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<ChStatus, Fail>) -> ChStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ChStatus::Panic
        }
    }
}

unsafe fn field<'a>(p: *const ChField, what: &str) -> Result<&'a ScalarField, Fail> {
    p.as_ref().map(|f| &f.0).ok_or_else(|| null(what))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail(ChStatus::NullPointer, "path is not valid UTF-8".into()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn solver(p: *const ChSolverParams) -> Result<SolverConfig, Fail> {
    let p = p.as_ref().ok_or_else(|| null("params"))?;
    let opt = |v: f64| (v > 0.0).then_some(v);
    let cfg = SolverConfig {
        dt: p.dt,
        c1: opt(p.c1),
        c2: opt(p.c2),
        max_steps: p.max_steps,
        tol: p.tol,
        eps_schedule: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

unsafe fn problem(
    f: *const ChField,
    mask: *const ChField,
    lambda0: f64,
    eps: f64,
) -> Result<InpaintProblem, Fail> {
    Ok(InpaintProblem::new(
        field(f, "f")?.clone(),
        field(mask, "mask")?.clone(),
        lambda0,
        eps,
    )?)
}

fn converged(c: bool) -> ChStatus {
    if c {
        ChStatus::Ok
    } else {
        ChStatus::NotConverged
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ch_solver_params_default() -> ChSolverParams {
    let d = SolverConfig::default();
    ChSolverParams {
        dt: d.dt,
        c1: 0.0,
        c2: 0.0,
        max_steps: d.max_steps,
        tol: d.tol,
    }
}

/// Copies `width * height` row-major values into a new field.
///
/// # Safety
/// `values` must point to `width * height` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ch_field_new(
    width: usize,
    height: usize,
    values: *const f64,
    out: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Fail(ChStatus::InvalidArgument, "grid too large".into()))?;
        let data = std::slice::from_raw_parts(values, n).to_vec();
        put(out, ChField(ScalarField::new(width, height, data)?))?;
        Ok(ChStatus::Ok)
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ch_field_free(field: *mut ChField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live field or null.
#[no_mangle]
pub unsafe extern "C" fn ch_field_width(field: *const ChField) -> usize {
    field.as_ref().map_or(0, |f| f.0.width())
}

/// # Safety
/// `field` must be a live field or null.
#[no_mangle]
pub unsafe extern "C" fn ch_field_height(field: *const ChField) -> usize {
    field.as_ref().map_or(0, |f| f.0.height())
}

/// Copies the values out; `len` must equal `width * height`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ch_field_values(
    field: *const ChField,
    out: *mut f64,
    len: usize,
) -> ChStatus {
    guard(|| {
        let f = self::field(field, "field")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != f.len() {
            return Err(Error::LengthMismatch {
                expected: f.len(),
                actual: len,
            }
            .into());
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(f.values());
        Ok(ChStatus::Ok)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ch_load_image(path: *const c_char, out: *mut *mut ChField) -> ChStatus {
    guard(|| {
        put(out, ChField(io::load_image(&self::path(path)?)?))?;
        Ok(ChStatus::Ok)
    })
}

/// Loads a mask for an image of the given size: pixel 0 is unknown.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ch_load_mask(
    path: *const c_char,
    width: usize,
    height: usize,
    out: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        put(
            out,
            ChField(io::load_mask(&self::path(path)?, (width, height))?),
        )?;
        Ok(ChStatus::Ok)
    })
}

/// Writes a binary PGM clamped to `[0, 1]`, 16-bit when `sixteen_bit` is nonzero.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ch_write_image(
    field: *const ChField,
    path: *const c_char,
    sixteen_bit: c_int,
) -> ChStatus {
    guard(|| {
        io::write_image(
            &self::path(path)?,
            self::field(field, "field")?,
            sixteen_bit != 0,
        )?;
        Ok(ChStatus::Ok)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ch_write_dump(field: *const ChField, path: *const c_char) -> ChStatus {
    guard(|| {
        io::write_dump(&self::path(path)?, self::field(field, "field")?)?;
        Ok(ChStatus::Ok)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ch_read_dump(path: *const c_char, out: *mut *mut ChField) -> ChStatus {
    guard(|| {
        put(out, ChField(io::read_dump(&self::path(path)?)?))?;
        Ok(ChStatus::Ok)
    })
}

/// Deterministic inpainting from `u = f`. On `NotConverged` the result is
/// still stored in `out`.
///
/// # Safety
/// Pointers must be live objects from this library; `steps` may be null.
#[no_mangle]
pub unsafe extern "C" fn ch_inpaint(
    f: *const ChField,
    mask: *const ChField,
    lambda0: f64,
    eps: f64,
    params: *const ChSolverParams,
    out: *mut *mut ChField,
    steps: *mut usize,
) -> ChStatus {
    guard(|| {
        let run = run_inpaint(&problem(f, mask, lambda0, eps)?, &solver(params)?)?;
        if let Some(s) = steps.as_mut() {
            *s = run.diagnostics.steps();
        }
        put(out, ChField(run.u))?;
        Ok(converged(run.diagnostics.converged))
    })
}

/// Stochastic Galerkin run for `u⁰ = f + Z`, `Z ~ N(0, sigma²)`.
///
/// # Safety
/// Pointers must be live objects from this library.
#[no_mangle]
pub unsafe extern "C" fn ch_galerkin(
    f: *const ChField,
    mask: *const ChField,
    lambda0: f64,
    eps: f64,
    sigma: f64,
    order: usize,
    params: *const ChSolverParams,
    out: *mut *mut ChModeStack,
) -> ChStatus {
    guard(|| {
        let family = PolynomialFamily::hermite(sigma, order)?;
        let run = run_galerkin(
            &problem(f, mask, lambda0, eps)?,
            &family,
            order,
            &solver(params)?,
        )?;
        put(out, ChModeStack(run.stack))?;
        Ok(converged(run.diagnostics.converged))
    })
}

/// # Safety
/// `stack` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ch_mode_stack_free(stack: *mut ChModeStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// Number of modes `N + 1`, or 0 for null.
///
/// # Safety
/// `stack` must be a live stack or null.
#[no_mangle]
pub unsafe extern "C" fn ch_mode_stack_len(stack: *const ChModeStack) -> usize {
    stack.as_ref().map_or(0, |s| s.0.modes().len())
}

/// Copy of mode `k`.
///
/// # Safety
/// `stack` must be a live stack.
#[no_mangle]
pub unsafe extern "C" fn ch_mode_stack_mode(
    stack: *const ChModeStack,
    k: usize,
    out: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        let s = stack.as_ref().ok_or_else(|| null("stack"))?;
        let m = s.0.mode(k).ok_or(Error::OutOfRange {
            name: "mode",
            index: k,
            max: s.0.order(),
        })?;
        put(out, ChField(m.clone()))?;
        Ok(ChStatus::Ok)
    })
}

/// Mean and variance fields of the expansion; either out-pointer may be null.
///
/// # Safety
/// `stack` must be a live stack.
#[no_mangle]
pub unsafe extern "C" fn ch_mode_stack_moments(
    stack: *const ChModeStack,
    mean: *mut *mut ChField,
    variance: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        let s = &stack.as_ref().ok_or_else(|| null("stack"))?.0;
        if !mean.is_null() {
            put(mean, ChField(mean_field(s)))?;
        }
        if !variance.is_null() {
            put(variance, ChField(variance_field(s)))?;
        }
        Ok(ChStatus::Ok)
    })
}

/// First-order perturbation run for `Z ~ U(0, delta)`: mean
/// `u₀ + (δ/2)u₁` and first-order variance.
///
/// # Safety
/// Pointers must be live objects from this library; `variance` may be null.
#[no_mangle]
pub unsafe extern "C" fn ch_perturbation(
    f: *const ChField,
    mask: *const ChField,
    lambda0: f64,
    eps: f64,
    delta: f64,
    params: *const ChSolverParams,
    mean: *mut *mut ChField,
    variance: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        let run = run_perturbation(&problem(f, mask, lambda0, eps)?, delta, &solver(params)?)?;
        put(mean, ChField(perturbation_mean(&run.state)))?;
        if !variance.is_null() {
            put(variance, ChField(perturbation_variance(&run.state)))?;
        }
        Ok(converged(run.diagnostics.converged))
    })
}

/// Monte Carlo over `samples` noisy initial images, each advanced exactly
/// `steps` steps. `scale` is σ for Gaussian noise and δ for uniform.
///
/// # Safety
/// Pointers must be live objects from this library; `variance` may be null.
#[no_mangle]
pub unsafe extern "C" fn ch_monte_carlo(
    f: *const ChField,
    mask: *const ChField,
    lambda0: f64,
    eps: f64,
    noise: ChNoise,
    scale: f64,
    samples: usize,
    seed: u64,
    params: *const ChSolverParams,
    steps: usize,
    mean: *mut *mut ChField,
    variance: *mut *mut ChField,
) -> ChStatus {
    guard(|| {
        let noise = match noise {
            ChNoise::Gaussian => NoiseModel::Gaussian { sigma: scale },
            ChNoise::Uniform => NoiseModel::Uniform { delta: scale },
        };
        let r = monte_carlo(
            &problem(f, mask, lambda0, eps)?,
            noise,
            samples,
            seed,
            &solver(params)?,
            steps,
        )?;
        put(mean, ChField(r.mean))?;
        if !variance.is_null() {
            put(variance, ChField(r.variance))?;
        }
        Ok(ChStatus::Ok)
    })
}
