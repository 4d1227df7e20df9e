//! C ABI over `csdim`.
//!
//! Laws are passed as opaque `CsdimDistribution` handles created by the
//! `csdim_dist_*` constructors and released with [`csdim_dist_free`]. Every
//! fallible call returns a [`CsdimStatus`] and writes its result through an
//! out-pointer; on failure the message is kept per thread and can be read with
//! [`csdim_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use csdim::algo_thresholds::{self, SignalFamily};
use csdim::config::DistConfig;
use csdim::dist::{self, Distribution};
use csdim::{bounds, gaussian_closedform, replica, scalar_channel, state_evolution, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsdimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotStandardized = 3,
    Config = 4,
    NoRoot = 5,
    Quadrature = 6,
    Unsatisfiable = 7,
    Io = 8,
    Utf8 = 9,
    Panic = 10,
}

impl From<&Error> for CsdimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CsdimStatus::InvalidArgument,
            Error::NotStandardized { .. } => CsdimStatus::NotStandardized,
            Error::Quadrature { .. } => CsdimStatus::Quadrature,
            Error::NoRoot => CsdimStatus::NoRoot,
            Error::Unsatisfiable(_) => CsdimStatus::Unsatisfiable,
            Error::Config { .. } => CsdimStatus::Config,
            Error::Io(_) => CsdimStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsdimFamily {
    Pm = 0,
    Plus = 1,
    Simple = 2,
}

/// Opaque input law.
pub struct CsdimDistribution(Distribution);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsdimReplica {
    pub n_roots: usize,
    pub beta_star: f64,
    pub eta: f64,
    pub dl_mse: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsdimDistortion {
    pub d_star: f64,
    pub d_star_linear: f64,
    pub d_l: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsdimThreshold {
    pub rate: f64,
    /// NaN for the simple family.
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsdimStateEvolution {
    pub alpha: f64,
    pub tau_sq: f64,
    pub mse: f64,
    /// 1 when the fixed-point iteration converged.
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard<F: FnOnce() -> Result<(), (CsdimStatus, String)>>(f: F) -> CsdimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CsdimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CsdimStatus::Panic
        }
    }
}

fn lib<T>(r: csdim::Result<T>) -> Result<T, (CsdimStatus, String)> {
    r.map_err(|e| (CsdimStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (CsdimStatus, String) {
    (CsdimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn dist_ref<'a>(h: *const CsdimDistribution) -> Result<&'a Distribution, (CsdimStatus, String)> {
    h.as_ref().map(|d| &d.0).ok_or_else(|| null("distribution handle"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (CsdimStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn boxed(d: Distribution) -> *mut CsdimDistribution {
    Box::into_raw(Box::new(CsdimDistribution(d)))
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `len`) into `buf` and returns the full message length excluding the
/// terminator. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn csdim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn csdim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Standard Gaussian.
#[no_mangle]
pub extern "C" fn csdim_dist_gaussian() -> *mut CsdimDistribution {
    boxed(Distribution::standard_gaussian())
}

/// Standardized Cantor law.
#[no_mangle]
pub extern "C" fn csdim_dist_cantor() -> *mut CsdimDistribution {
    boxed(Distribution::standard_cantor())
}

/// Standardized `(1−γ)δ₀ + γN(0, 1)`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_dist_sparse_gaussian(gamma: f64, out: *mut *mut CsdimDistribution) -> CsdimStatus {
    guard(|| {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err((CsdimStatus::InvalidArgument, format!("gamma must lie in (0, 1), got {gamma}")));
        }
        write(out, boxed(Distribution::standard_sparse_gaussian(gamma)))
    })
}

/// Builds a law from a TOML distribution config.
///
/// # Safety
/// `toml` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_dist_from_toml(toml: *const c_char, out: *mut *mut CsdimDistribution) -> CsdimStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("config text"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| (CsdimStatus::Utf8, format!("config is not UTF-8: {e}")))?;
        let d = lib(DistConfig::from_toml_str(text).and_then(|c| c.build()))?;
        write(out, boxed(d))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `h` must be null or a handle from a `csdim_dist_*` constructor that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn csdim_dist_free(h: *mut CsdimDistribution) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_dist_info_dimension(h: *const CsdimDistribution, out: *mut f64) -> CsdimStatus {
    guard(|| write(out, dist::info_dimension(dist_ref(h)?)))
}

/// Scalar-channel MMSE of a standardized law.
///
/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_mmse(h: *const CsdimDistribution, snr: f64, out: *mut f64) -> CsdimStatus {
    guard(|| {
        let d = dist_ref(h)?;
        write(out, lib(scalar_channel::mmse(d, snr))?)
    })
}

/// Mutual information in nats.
///
/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_mutual_info(h: *const CsdimDistribution, snr: f64, out: *mut f64) -> CsdimStatus {
    guard(|| {
        let d = dist_ref(h)?;
        write(out, lib(scalar_channel::mutual_info(d, snr))?)
    })
}

/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_replica(
    h: *const CsdimDistribution,
    rate: f64,
    noise_var: f64,
    out: *mut CsdimReplica,
) -> CsdimStatus {
    guard(|| {
        let s = lib(replica::replica_mse(dist_ref(h)?, rate, noise_var))?;
        write(
            out,
            CsdimReplica {
                n_roots: s.roots.len(),
                beta_star: s.selected_beta,
                eta: s.eta,
                dl_mse: s.dl_mse,
            },
        )
    })
}

/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_gaussian_curves(rate: f64, noise_var: f64, out: *mut CsdimDistortion) -> CsdimStatus {
    guard(|| {
        let p = lib(gaussian_closedform::gaussian_curves(rate, noise_var))?;
        write(
            out,
            CsdimDistortion {
                d_star: p.d_star,
                d_star_linear: p.d_star_linear,
                d_l: p.d_l,
            },
        )
    })
}

/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_threshold(family: CsdimFamily, gamma: f64, out: *mut CsdimThreshold) -> CsdimStatus {
    guard(|| {
        let f = match family {
            CsdimFamily::Pm => SignalFamily::Pm,
            CsdimFamily::Plus => SignalFamily::Plus,
            CsdimFamily::Simple => SignalFamily::Simple,
        };
        let t = lib(algo_thresholds::threshold(f, gamma))?;
        write(
            out,
            CsdimThreshold {
                rate: t.rate,
                alpha: t.alpha,
            },
        )
    })
}

/// State evolution with α optimized when `alpha` is negative, fixed otherwise.
/// The law must be a mixture.
///
/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_state_evolution(
    h: *const CsdimDistribution,
    rate: f64,
    noise_var: f64,
    alpha: f64,
    out: *mut CsdimStateEvolution,
) -> CsdimStatus {
    guard(|| {
        let Distribution::Mixture(m) = dist_ref(h)? else {
            return Err((CsdimStatus::InvalidArgument, "state evolution needs a mixture law".into()));
        };
        let s = if alpha < 0.0 {
            lib(state_evolution::optimize_alpha(m, rate, noise_var))?
        } else {
            lib(state_evolution::solve_se(m, rate, noise_var, alpha))?
        };
        write(
            out,
            CsdimStateEvolution {
                alpha: s.alpha,
                tau_sq: s.tau_star_sq,
                mse: s.mse,
                converged: s.converged as i32,
            },
        )
    })
}

/// Lipschitz constant of the achievability construction; `entropy` in nats.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn csdim_lipschitz_constant(gamma: f64, entropy: f64, rate: f64, out: *mut f64) -> CsdimStatus {
    guard(|| write(out, lib(bounds::lipschitz_constant(gamma, entropy, rate))?))
}
