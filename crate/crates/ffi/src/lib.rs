//! C interface to `loewner_witt`.
//!
//! Every fallible function returns an [`LwStatus`]. On failure a message is
//! kept per thread and can be copied out with [`lw_last_error`]. Results that
//! own memory come back as opaque handles which must be released with their
//! matching `_free` function. Complex numbers cross the boundary as separate
//! real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use loewner_witt::checks;
use loewner_witt::evolution::driving::DrivingFunction;
use loewner_witt::evolution::flow::{integrate_with, EvolutionState, IntegrateOptions, Trajectory};
use loewner_witt::sle::{self, Observable, SleParams};
use loewner_witt::Error;
use num_complex::Complex64;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    OutOfRange = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> LwStatus {
    match e {
        Error::BlowUp { .. } | Error::Degenerate { .. } => LwStatus::Numerical,
        Error::IndexOutOfRange { .. } => LwStatus::OutOfRange,
        _ => LwStatus::InvalidArgument,
    }
}

struct Fail(LwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(LwStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LwStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            LwStatus::Panic
        }
    }
}

unsafe fn complex_slice(re: *const f64, im: *const f64, len: usize, name: &str) -> Result<Vec<Complex64>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(null(name));
    }
    let (re, im) = (slice::from_raw_parts(re, len), slice::from_raw_parts(im, len));
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Copies the calling thread's last error message into `buf`, truncated and
/// NUL-terminated. Returns the full message length in bytes, excluding the
/// terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lw_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lw_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Trajectory of the coefficient flow.
pub struct LwTrajectory {
    inner: Trajectory,
}

/// Integrates the coefficient flow from the identity map with the constant
/// driving function `p(z) = Σ p_k z^k` (`p_0` must be 1) using RK4.
///
/// # Safety
/// `p_re` and `p_im` must point to `p_len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_evolve_constant(
    n: usize,
    p_re: *const f64,
    p_im: *const f64,
    p_len: usize,
    dt: f64,
    t_end: f64,
    out: *mut *mut LwTrajectory,
) -> LwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = complex_slice(p_re, p_im, p_len, "p")?;
        let drv = DrivingFunction::constant(p)?;
        let traj = integrate_with(&EvolutionState::identity(n), &drv, t_end, &IntegrateOptions::new(dt))?;
        out.write(Box::into_raw(Box::new(LwTrajectory { inner: traj })));
        Ok(())
    })
}

/// Number of stored samples, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lw_trajectory_len(h: *const LwTrajectory) -> usize {
    h.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// Number of coefficients per sample, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lw_trajectory_dim(h: *const LwTrajectory) -> usize {
    h.as_ref().map_or(0, |t| t.inner.samples[0].c.len())
}

/// Copies sample `i`: its time and `c_1..c_n` into arrays of length `n`.
///
/// # Safety
/// `h` must be a live handle; the output pointers must be writable for the
/// stated lengths.
#[no_mangle]
pub unsafe extern "C" fn lw_trajectory_sample(
    h: *const LwTrajectory,
    i: usize,
    t: *mut f64,
    c_re: *mut f64,
    c_im: *mut f64,
    n: usize,
) -> LwStatus {
    guard(|| {
        let traj = h.as_ref().ok_or_else(|| null("trajectory"))?;
        let s = traj.inner.samples.get(i).ok_or_else(|| {
            Fail(
                LwStatus::OutOfRange,
                format!("sample {i} of {}", traj.inner.samples.len()),
            )
        })?;
        if n != s.c.len() {
            return Err(Fail(
                LwStatus::InvalidArgument,
                format!("buffer length {n}, dimension {}", s.c.len()),
            ));
        }
        if n > 0 && (c_re.is_null() || c_im.is_null()) {
            return Err(null("c"));
        }
        write(t, s.t, "t")?;
        for (k, z) in s.c.iter().enumerate() {
            *c_re.add(k) = z.re;
            *c_im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lw_trajectory_free(h: *mut LwTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Largest residual of `[L_m, L_k] - (k-m) L_{m+k}` over all pairs with
/// `m + k <= n`. Zero when the identity holds exactly.
///
/// # Safety
/// `max_residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_witt_check(n: usize, max_residual: *mut f64) -> LwStatus {
    guard(|| {
        let r = checks::witt_check(n)?;
        let m = r.entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        write(max_residual, m, "max_residual")
    })
}

/// Central charge and conformal weight attached to `kappa`.
///
/// # Safety
/// `c` and `h` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_charge_weight(kappa: f64, c: *mut f64, h: *mut f64) -> LwStatus {
    guard(|| {
        let cw = sle::charge_weight(kappa)?;
        write(c, cw.c, "c")?;
        write(h, cw.h, "h")
    })
}

/// Closed-form chordal map `sqrt(z^2 + 4t)` on the upper branch.
///
/// # Safety
/// `g_re` and `g_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_chordal_map(z_re: f64, z_im: f64, t: f64, g_re: *mut f64, g_im: *mut f64) -> LwStatus {
    guard(|| {
        let g = sle::deterministic_map(Complex64::new(z_re, z_im), t);
        write(g_re, g.re, "g_re")?;
        write(g_im, g.im, "g_im")
    })
}

/// Summary of a Monte-Carlo martingale run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct LwMartingaleSummary {
    /// `|mean F(k_T) - F(z0)|` in standard errors at the final time.
    pub final_deviation: f64,
    /// Largest deviation over all checkpoints, in standard errors.
    pub max_deviation: f64,
    pub swallowed_fraction: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub std_error: f64,
}

/// Runs the martingale test for `F(z) = Σ a_j z^{α_j}` along chordal SLE
/// started at `z0`. Fails with `InvalidArgument` when `F` is not drift-less.
/// Results do not depend on the number of worker threads.
///
/// # Safety
/// The coefficient and power arrays must hold `terms` doubles each; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_sle_martingale(
    kappa: f64,
    dt: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    z0_re: f64,
    z0_im: f64,
    coeff_re: *const f64,
    coeff_im: *const f64,
    powers: *const f64,
    terms: usize,
    out: *mut LwMartingaleSummary,
) -> LwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = complex_slice(coeff_re, coeff_im, terms, "coeff")?;
        if terms > 0 && powers.is_null() {
            return Err(null("powers"));
        }
        let p = if terms > 0 { slice::from_raw_parts(powers, terms) } else { &[] };
        let obs = Observable {
            terms: a.into_iter().zip(p.iter().copied()).collect(),
        };
        let params = SleParams::new(kappa, dt, horizon, n_paths, seed);
        let r = sle::martingale_test(&obs, &params, Complex64::new(z0_re, z0_im))?;
        let last = r.checkpoints.last().expect("at least one checkpoint");
        out.write(LwMartingaleSummary {
            final_deviation: last.deviation,
            max_deviation: r.max_deviation(),
            swallowed_fraction: r.swallowed_fraction,
            mean_re: last.mean_re,
            mean_im: last.mean_im,
            std_error: last.stderr,
        });
        Ok(())
    })
}
