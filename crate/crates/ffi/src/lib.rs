//! C interface to `glauber`.
//!
//! Every function returns a [`GlauberStatus`]. On failure the message is kept
//! per thread and can be read with [`glauber_last_error`]. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use glauber::config::ExperimentConfig;
use glauber::discrete::{coercivity_constant_certificate, spectral_gap_exact, LatticeModel, StateSelection};
use glauber::experiments::{self, Experiment, Overrides};
use glauber::potentials::{check_positive_definite, SampledFunction, Witness};
use glauber::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlauberStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// A parsed experiment configuration.
pub struct GlauberExperiment {
    inner: Experiment,
}

/// A finite lattice model built from an experiment.
pub struct GlauberLattice {
    inner: LatticeModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GlauberStatus {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Csv { .. } => GlauberStatus::Config,
        Error::Io { .. } => GlauberStatus::Io,
        Error::InvalidParameter(_) | Error::NotPowerOfTwo(_) | Error::StateSpaceOverflow { .. } => {
            GlauberStatus::InvalidArgument
        }
        _ => GlauberStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GlauberStatus, String)>) -> GlauberStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlauberStatus::Ok,
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
            set_error(format!("panic: {msg}"));
            GlauberStatus::Panic
        }
    }
}

fn lift<T>(r: glauber::Result<T>) -> Result<T, (GlauberStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (GlauberStatus, String) {
    (GlauberStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (GlauberStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GlauberStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn glauber_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn glauber_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML configuration. Relative paths inside it resolve against the
/// working directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut GlauberExperiment,
) -> GlauberStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(toml, "toml")?;
        let cfg = lift(ExperimentConfig::from_toml(text, Path::new(".")))?;
        let inner = lift(Experiment::new(cfg, &Overrides::default()))?;
        *out = Box::into_raw(Box::new(GlauberExperiment { inner }));
        Ok(())
    })
}

/// # Safety
/// `exp` must come from [`glauber_experiment_from_toml`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn glauber_experiment_free(exp: *mut GlauberExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// SHA-256 of the effective configuration as 64 hex digits plus NUL.
///
/// # Safety
/// `exp` must be a live handle and `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn glauber_experiment_hash(
    exp: *const GlauberExperiment,
    buf: *mut c_char,
    len: usize,
) -> GlauberStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("exp"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let h = exp.inner.config_sha256.as_bytes();
        if len < h.len() + 1 {
            return Err((
                GlauberStatus::InvalidArgument,
                format!("buffer needs {} bytes", h.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(h.as_ptr().cast(), buf, h.len());
        *buf.add(h.len()) = 0;
        Ok(())
    })
}

/// Runs a command by name (`check-potential`, `verify-identities`, `gap`,
/// `simulate`, `estimate-gap`), writing its files to the configured output
/// directory. The JSON report goes to `json_out` (free with
/// [`glauber_string_free`]) and the pass flag to `passed`.
///
/// # Safety
/// `exp` must be a live handle, `command` a NUL-terminated string, and
/// `json_out` and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_run(
    exp: *const GlauberExperiment,
    command: *const c_char,
    json_out: *mut *mut c_char,
    passed: *mut c_int,
) -> GlauberStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("exp"))?;
        if json_out.is_null() || passed.is_null() {
            return Err(null("json_out or passed"));
        }
        let e = &exp.inner;
        let (json, ok) = match str_arg(command, "command")? {
            "check-potential" => {
                lift(experiments::check_potential(e)).map(|r| (serde_json::to_string(&r), r.passed))?
            }
            "verify-identities" => {
                lift(experiments::verify_identities(e)).map(|r| (serde_json::to_string(&r), r.passed))?
            }
            "gap" => lift(experiments::gap(e)).map(|r| (serde_json::to_string(&r), r.passed))?,
            "simulate" => lift(experiments::run_simulation(e)).map(|r| (serde_json::to_string(&r), true))?,
            "estimate-gap" => lift(experiments::estimate_gap(e)).map(|r| (serde_json::to_string(&r), true))?,
            other => return Err((GlauberStatus::InvalidArgument, format!("unknown command `{other}`"))),
        };
        let json = json.map_err(|e| (GlauberStatus::Numerical, e.to_string()))?;
        *json_out = CString::new(json).unwrap_or_default().into_raw();
        *passed = ok as c_int;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn glauber_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the lattice model of an experiment (its `[lattice]` section).
///
/// # Safety
/// `exp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_lattice_new(
    exp: *const GlauberExperiment,
    out: *mut *mut GlauberLattice,
) -> GlauberStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("exp"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = &exp.inner.config;
        let sys = lift(cfg.system())?;
        let l = &cfg.lattice;
        let inner = lift(LatticeModel::with_limit(&sys, l.m, l.cap, l.state_limit as u128))?;
        *out = Box::into_raw(Box::new(GlauberLattice { inner }));
        Ok(())
    })
}

/// # Safety
/// `lat` must come from [`glauber_lattice_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn glauber_lattice_free(lat: *mut GlauberLattice) {
    if !lat.is_null() {
        drop(Box::from_raw(lat));
    }
}

/// Number of states with positive weight.
///
/// # Safety
/// `lat` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_lattice_state_count(lat: *const GlauberLattice, out: *mut usize) -> GlauberStatus {
    guard(|| {
        let lat = lat.as_ref().ok_or_else(|| null("lat"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lat.inner.state_count();
        Ok(())
    })
}

/// Exact spectral gap of the lattice generator.
///
/// # Safety
/// `lat` must be a live handle and `gap` writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_lattice_gap(lat: *const GlauberLattice, gap: *mut f64) -> GlauberStatus {
    guard(|| {
        let lat = lat.as_ref().ok_or_else(|| null("lat"))?;
        let gap = gap.as_mut().ok_or_else(|| null("gap"))?;
        *gap = lift(spectral_gap_exact(&lat.inner))?.gap;
        Ok(())
    })
}

/// Coercivity constant certified by the kernel condition on every state.
///
/// # Safety
/// `lat` must be a live handle and `c` writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_lattice_certificate(lat: *const GlauberLattice, c: *mut f64) -> GlauberStatus {
    guard(|| {
        let lat = lat.as_ref().ok_or_else(|| null("lat"))?;
        let c = c.as_mut().ok_or_else(|| null("c"))?;
        *c = lift(coercivity_constant_certificate(&lat.inner, &StateSelection::All))?.certified_c;
        Ok(())
    })
}

/// Fourier positivity test of `n` samples of an even function on a periodic
/// grid of length `length`: `n` a power of two, sample `k` at `-length/2 + k length / n`.
///
/// # Safety
/// `samples` must point to `n` doubles; `passed` and `min_real` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glauber_check_positive_definite(
    samples: *const f64,
    n: usize,
    length: f64,
    tol: f64,
    passed: *mut c_int,
    min_real: *mut f64,
) -> GlauberStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        let min_real = min_real.as_mut().ok_or_else(|| null("min_real"))?;
        let values = std::slice::from_raw_parts(samples, n).to_vec();
        let s = lift(SampledFunction::new(1, n, length, values))?;
        let r = lift(check_positive_definite(&s, tol))?;
        *passed = r.passed as c_int;
        if let Witness::Fourier { min_real: m, .. } = r.witness {
            *min_real = m;
        }
        Ok(())
    })
}
