// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use qconfine_ffi::*;

fn last_error() -> String {
    let p = qc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn hn() -> *mut QcHamiltonian {
    let name = CString::new("Hn").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qc_hamiltonian_family(name.as_ptr(), 0.0, &mut h) }, QcStatus::Ok);
    h
}

#[test]
fn exact_leakage_and_bounds_of_named_family() {
    let h = hn();
    let (mut eps, mut lo, mut hi) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(qc_hamiltonian_dim(h), 3);
        assert_eq!(qc_exact_leakage(h, &mut eps), QcStatus::Ok);
        assert_eq!(qc_analytic_bounds(h, &mut lo, &mut hi), QcStatus::Ok);
        qc_hamiltonian_free(h);
    }
    assert!((eps - 3.97615e-4).abs() < 1e-8);
    assert!(lo <= eps && (hi - eps).abs() < 1e-12);
}

#[test]
fn non_hermitian_matrix_is_rejected_with_message() {
    let re = [0.0, 1.0, 0.5, 0.0];
    let mut h = ptr::null_mut();
    let s = unsafe { qc_hamiltonian_new(re.as_ptr(), ptr::null(), 2, &mut h) };
    assert_eq!(s, QcStatus::NonHermitian);
    assert!(h.is_null());
    assert!(last_error().contains("not Hermitian"));
}

#[test]
fn complex_matrix_round_trip() {
    let re = [0.0, 1.0, 1.0, 1.0];
    let im = [0.0, 0.5, -0.5, 0.0];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(qc_hamiltonian_new(re.as_ptr(), im.as_ptr(), 2, &mut h), QcStatus::Ok);
        let mut eps = -1.0;
        assert_eq!(qc_exact_leakage(h, &mut eps), QcStatus::Ok);
        assert!(eps.abs() < 1e-12);
        qc_hamiltonian_free(h);
    }
}

#[test]
fn null_arguments_are_reported() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(qc_exact_leakage(ptr::null(), &mut x), QcStatus::NullPointer);
        assert_eq!(qc_bounds(0.6, 0.2, ptr::null_mut(), &mut x), QcStatus::NullPointer);
        assert_eq!(qc_hamiltonian_dim(ptr::null()), 0);
        assert_eq!(qc_trace_len(ptr::null()), 0);
        qc_hamiltonian_free(ptr::null_mut());
        qc_trace_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn simulate_and_estimate_ideal_trace() {
    let h = hn();
    let mut t = ptr::null_mut();
    let mut est = QcEstimate::default();
    unsafe {
        // primary transition of Hn is near 2.236; 20 points per period, 200 periods
        let dt = 2.0 * std::f64::consts::PI / 2.2364 / 20.0;
        assert_eq!(qc_trace_simulate(h, dt, 4000, 0, 0, &mut t), QcStatus::Ok);
        assert_eq!(qc_trace_len(t), 4000);
        let mut buf = [0.0; 4];
        let mut n = 0;
        assert_eq!(qc_trace_populations(t, buf.as_mut_ptr(), 4, &mut n), QcStatus::Ok);
        assert_eq!(n, 4);
        assert!((buf[0] - 1.0).abs() < 1e-15);
        assert_eq!(qc_estimate_trace(t, 1, &mut est), QcStatus::Ok);
        qc_trace_free(t);
        qc_hamiltonian_free(h);
    }
    assert!((est.eps_high - 3.97615e-4).abs() <= 3.0 * est.d_eps_high, "{est:?}");
    assert!(est.kept > 0 && est.kept <= 4000);
    assert_eq!(est.flags & QC_FLAG_EPS_HIGH_UNDEFINED, 0);
}

#[test]
fn short_trace_reports_too_short() {
    let times: Vec<f64> = (0..10).map(|k| k as f64 * 0.1).collect();
    let pops: Vec<f64> = times.iter().map(|t| (t * 3.0f64).cos().powi(2)).collect();
    let mut t = ptr::null_mut();
    let mut est = QcEstimate::default();
    unsafe {
        assert_eq!(qc_trace_new(times.as_ptr(), pops.as_ptr(), 10, 0, &mut t), QcStatus::Ok);
        assert_eq!(qc_estimate_trace(t, 1, &mut est), QcStatus::TooShort);
        qc_trace_free(t);
    }
}

#[test]
fn uneven_times_fail_at_estimate() {
    let mut times: Vec<f64> = (0..400).map(|k| k as f64 * 0.1).collect();
    times[200] += 0.03;
    let pops: Vec<f64> = times.iter().map(|t| (t * 0.5f64).cos().powi(2)).collect();
    let mut t = ptr::null_mut();
    let mut est = QcEstimate::default();
    unsafe {
        assert_eq!(qc_trace_new(times.as_ptr(), pops.as_ptr(), 400, 0, &mut t), QcStatus::Ok);
        assert_eq!(qc_estimate_trace(t, 1, &mut est), QcStatus::NonUniformSampling);
        qc_trace_free(t);
    }
    assert!(last_error().contains("uniformly"));
}

#[test]
fn heights_to_estimate_and_undefined_upper_bound() {
    let mut est = QcEstimate::default();
    unsafe {
        assert_eq!(qc_estimate_heights(0.6, 0.2, 0.0, &mut est), QcStatus::Ok);
        assert!(est.eps_low.abs() < 1e-15 && est.eps_high.abs() < 1e-15);
        assert_eq!(qc_estimate_heights(0.3, 0.05, 1e-3, &mut est), QcStatus::Ok);
        assert!(est.eps_high.is_nan() && est.d_eps_high.is_nan());
        assert_ne!(est.flags & QC_FLAG_EPS_HIGH_UNDEFINED, 0);
        assert_eq!(qc_estimate_heights(1.2, 0.0, 0.0, &mut est), QcStatus::OutOfRangePeaks);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(qc_bounds(0.3, 0.05, &mut lo, &mut hi), QcStatus::RadicandNegative);
    }
}

#[test]
fn resolution_limit() {
    let mut r = QcResolution::default();
    unsafe {
        assert_eq!(qc_max_resolution(1e-4, 1e-8, &mut r), QcStatus::Ok);
        assert!((r.delta_f - 253.3).abs() < 0.1);
        assert_eq!(qc_max_resolution(1e-4, 0.5, &mut r), QcStatus::DegenerateTarget);
    }
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(qc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
