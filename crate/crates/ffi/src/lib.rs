// SPDX-License-Identifier: Apache-2.0

//! C ABI for `qconfine`.
//!
//! Objects cross the boundary as opaque handles created by `qc_*_new`-style
//! calls and released with the matching `qc_*_free`. Every fallible call
//! returns a [`QcStatus`]; on failure `qc_last_error()` describes it until the
//! next call on the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qconfine::decoherence::max_resolution;
use qconfine::estimate::{analyze_trace_with_guard, Flags, LeakageEstimate};
use qconfine::{
    analytic_bounds, analytic_peaks, bounds_from_heights, estimate, exact_leakage, family, sample_trace, CMatrix,
    Error, Family, HermitianOperator, RabiTrace, SamplingPlan,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    NonHermitian = 2,
    InvalidDimension = 3,
    Malformed = 4,
    RadicandNegative = 5,
    OutOfRangePeaks = 6,
    UnknownFamily = 7,
    NonUniformSampling = 8,
    TooShort = 9,
    InvalidPlan = 10,
    SingularResolvent = 11,
    RegimeViolation = 12,
    DegenerateTarget = 13,
    Io = 14,
    Panic = 15,
}

impl From<&Error> for QcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonHermitianInput { .. } => QcStatus::NonHermitian,
            Error::InvalidDimension(_) => QcStatus::InvalidDimension,
            Error::Malformed { .. } => QcStatus::Malformed,
            Error::RadicandNegative(_) => QcStatus::RadicandNegative,
            Error::OutOfRangePeaks { .. } => QcStatus::OutOfRangePeaks,
            Error::UnknownFamily(_) => QcStatus::UnknownFamily,
            Error::NonUniformSampling { .. } => QcStatus::NonUniformSampling,
            Error::TooShort { .. } => QcStatus::TooShort,
            Error::InvalidPlan(_) => QcStatus::InvalidPlan,
            Error::SingularResolvent(_) => QcStatus::SingularResolvent,
            Error::RegimeViolation { .. } => QcStatus::RegimeViolation,
            Error::DegenerateTarget(_) => QcStatus::DegenerateTarget,
            Error::Io(_) => QcStatus::Io,
        }
    }
}

/// Opaque Hermitian operator.
pub struct QcHamiltonian(HermitianOperator);

/// Opaque sampled Rabi trace.
pub struct QcTrace(RabiTrace);

pub const QC_FLAG_EPS_LOW_CLAMPED: u32 = 1;
pub const QC_FLAG_EPS_HIGH_CLAMPED: u32 = 1 << 1;
pub const QC_FLAG_EPS_HIGH_UNDEFINED: u32 = 1 << 2;
pub const QC_FLAG_EDGE_CLAMPED: u32 = 1 << 3;
pub const QC_FLAG_NO_OSCILLATION: u32 = 1 << 4;

/// Leakage bounds with one-sigma uncertainties. `eps_high` and
/// `d_eps_high` are NaN when `QC_FLAG_EPS_HIGH_UNDEFINED` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcEstimate {
    pub eps_low: f64,
    pub eps_high: f64,
    pub d_eps_low: f64,
    pub d_eps_high: f64,
    pub h0: f64,
    pub h01: f64,
    pub noise_sd: f64,
    /// Samples kept by phase matching; zero for height-only estimates.
    pub kept: usize,
    /// `QC_FLAG_*` bits.
    pub flags: u32,
}

/// Longest-record limit for a target leakage under a given linewidth.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcResolution {
    /// Angular channel width.
    pub delta_omega: f64,
    /// Ordinary-frequency channel width.
    pub delta_f: f64,
    pub t_ob: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), QcStatus>) -> QcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            QcStatus::Panic
        }
    }
}

fn fail(e: Error) -> QcStatus {
    let s = QcStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> QcStatus {
    set_error(format!("{what} is null"));
    QcStatus::NullPointer
}

fn flag_bits(f: &Flags) -> u32 {
    let mut b = 0;
    for (on, bit) in [
        (f.eps_low_clamped, QC_FLAG_EPS_LOW_CLAMPED),
        (f.eps_high_clamped, QC_FLAG_EPS_HIGH_CLAMPED),
        (f.eps_high_undefined, QC_FLAG_EPS_HIGH_UNDEFINED),
        (f.edge_clamped, QC_FLAG_EDGE_CLAMPED),
        (f.no_oscillation, QC_FLAG_NO_OSCILLATION),
    ] {
        if on {
            b |= bit;
        }
    }
    b
}

fn to_c(e: &LeakageEstimate, kept: usize) -> QcEstimate {
    QcEstimate {
        eps_low: e.eps_low,
        eps_high: e.eps_high.unwrap_or(f64::NAN),
        d_eps_low: e.d_eps_low,
        d_eps_high: e.d_eps_high.unwrap_or(f64::NAN),
        h0: e.h0,
        h01: e.h01,
        noise_sd: e.noise_sd,
        kept,
        flags: flag_bits(&e.flags),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `qc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an operator from row-major `dim*dim` arrays. `imag` may be NULL
/// for a real matrix.
///
/// # Safety
/// `real` (and `imag` when non-null) must point to `dim*dim` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_hamiltonian_new(
    real: *const f64,
    imag: *const f64,
    dim: usize,
    out: *mut *mut QcHamiltonian,
) -> QcStatus {
    guard(|| {
        if real.is_null() {
            return Err(null("real"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n2 = dim.checked_mul(dim).ok_or_else(|| fail(Error::InvalidDimension(dim)))?;
        let re = std::slice::from_raw_parts(real, n2);
        let im = (!imag.is_null()).then(|| std::slice::from_raw_parts(imag, n2));
        let m = CMatrix::from_fn(dim, |i, j| Complex64::new(re[i * dim + j], im.map_or(0.0, |v| v[i * dim + j])));
        let h = HermitianOperator::new(m).map_err(fail)?;
        *out = Box::into_raw(Box::new(QcHamiltonian(h)));
        Ok(())
    })
}

/// Named trial Hamiltonian (`Hm`, `Hn`, `Ha`, `Hb`, `H3`..`H10`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_hamiltonian_family(
    name: *const c_char,
    gamma: f64,
    out: *mut *mut QcHamiltonian,
) -> QcStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| {
            fail(Error::Malformed { field: "name".into(), reason: "not UTF-8".into() })
        })?;
        let f: Family = name.parse().map_err(fail)?;
        *out = Box::into_raw(Box::new(QcHamiltonian(family(f, gamma).map_err(fail)?)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qc_hamiltonian_free(h: *mut QcHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of `h`, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_hamiltonian_dim(h: *const QcHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim())
}

/// Exact leakage out of the qubit subspace.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_exact_leakage(h: *const QcHamiltonian, out: *mut f64) -> QcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = exact_leakage(&h.0);
        Ok(())
    })
}

/// Lower and upper bounds from the exact peak heights of `h`.
///
/// # Safety
/// `h` must be a live handle; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_analytic_bounds(h: *const QcHamiltonian, lo: *mut f64, hi: *mut f64) -> QcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let (lo, hi) = (lo.as_mut().ok_or_else(|| null("lo"))?, hi.as_mut().ok_or_else(|| null("hi"))?);
        (*lo, *hi) = analytic_bounds(&analytic_peaks(&h.0)).map_err(fail)?;
        Ok(())
    })
}

/// Lower and upper bounds from a DC height and a Rabi-line height.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_bounds(h0: f64, h01: f64, lo: *mut f64, hi: *mut f64) -> QcStatus {
    guard(|| {
        let (lo, hi) = (lo.as_mut().ok_or_else(|| null("lo"))?, hi.as_mut().ok_or_else(|| null("hi"))?);
        (*lo, *hi) = bounds_from_heights(h0, h01).map_err(fail)?;
        Ok(())
    })
}

/// Simulates `num_samples` points spaced `dt`, each measured
/// `ensemble_size` times; zero gives the noiseless trace.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_simulate(
    h: *const QcHamiltonian,
    dt: f64,
    num_samples: usize,
    ensemble_size: u64,
    seed: u64,
    out: *mut *mut QcTrace,
) -> QcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let plan = SamplingPlan::new(dt, num_samples, ensemble_size, seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(QcTrace(sample_trace(&h.0, &plan).map_err(fail)?)));
        Ok(())
    })
}

/// Wraps measured data. `ensemble_size` 0 marks it noiseless.
///
/// # Safety
/// `times` and `populations` must point to `len` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_new(
    times: *const f64,
    populations: *const f64,
    len: usize,
    ensemble_size: u64,
    out: *mut *mut QcTrace,
) -> QcStatus {
    guard(|| {
        if times.is_null() || populations.is_null() {
            return Err(null("times or populations"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let trace = RabiTrace {
            times: std::slice::from_raw_parts(times, len).to_vec(),
            populations: std::slice::from_raw_parts(populations, len).to_vec(),
            ensemble_size,
            seed: 0,
        };
        trace.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(QcTrace(trace)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_free(t: *mut QcTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_len(t: *const QcTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copies up to `cap` populations into `buf`; `written` receives the count.
///
/// # Safety
/// `t` must be a live handle; `buf` must hold `cap` doubles; `written` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_populations(
    t: *const QcTrace,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> QcStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        let n = cap.min(t.0.len());
        if n > 0 && buf.is_null() {
            return Err(null("buf"));
        }
        if n > 0 {
            std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&t.0.populations[..n]);
        }
        *written = n;
        Ok(())
    })
}

/// Full pipeline on a trace: phase match, transform, bounds.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_estimate_trace(t: *const QcTrace, guard_channels: usize, out: *mut QcEstimate) -> QcStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = analyze_trace_with_guard(&t.0, guard_channels).map_err(fail)?;
        *out = to_c(&a.estimate, a.kept);
        Ok(())
    })
}

/// Bounds and uncertainties from peak heights and the off-peak spread.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_estimate_heights(h0: f64, h01: f64, noise_sd: f64, out: *mut QcEstimate) -> QcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = to_c(&estimate(h0, h01, noise_sd).map_err(fail)?, 0);
        Ok(())
    })
}

/// Coarsest resolution keeping the upper bound at or below `zeta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_max_resolution(gamma: f64, zeta: f64, out: *mut QcResolution) -> QcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = max_resolution(gamma, zeta).map_err(fail)?;
        *out = QcResolution { delta_omega: r.delta_omega, delta_f: r.delta_f, t_ob: r.t_ob };
        Ok(())
    })
}
