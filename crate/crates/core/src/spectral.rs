// SPDX-License-Identifier: Apache-2.0

//! Fourier analysis of Rabi traces.
//!
//! The spectrum is one-sided, `F(w_j) = |sum_k p_k exp(-i w_j t_k)| / K` for
//! `j = 0..=K/2`, with no mean subtraction, windowing or zero padding. With
//! that scaling the DC channel is the trace mean and a term
//! `2 h cos(w t)` that completes an integer number of periods shows up as a
//! single channel of height `h`, so `h0 + 2 h01` reads directly off the
//! spectrum.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RabiTrace;

/// Channels on each side of a primary line kept out of the noise window.
pub const DEFAULT_GUARD: usize = 1;

/// Relative spacing error tolerated before a trace counts as non-uniform.
const SPACING_TOL: f64 = 1e-9;

/// Below this the trace is treated as flat and phase matching is skipped.
const FLAT_THRESHOLD: f64 = 1e-12;

/// Relative window inside which trial-function values count as equal.
const TRIAL_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequencies `j * resolution`.
    pub freqs: Vec<f64>,
    pub amps: Vec<f64>,
    /// Channel spacing `2 pi / (K dt)`.
    pub resolution: f64,
    pub num_samples: usize,
    /// Index of the dominant non-DC channel.
    pub primary_index: usize,
    pub guard: usize,
    pub noise_mean: f64,
    pub noise_sd: f64,
}

/// Heights and noise-floor statistics read off a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakStats {
    pub h0: f64,
    pub h01: f64,
    /// Angular frequency of the primary channel.
    pub omega_p: f64,
    pub noise_mean: f64,
    pub noise_sd: f64,
}

impl Spectrum {
    pub fn h0(&self) -> f64 {
        self.amps[0]
    }

    pub fn h01(&self) -> f64 {
        self.amps[self.primary_index]
    }

    pub fn omega_p(&self) -> f64 {
        self.freqs[self.primary_index]
    }

    pub fn channel_of(&self, omega: f64) -> usize {
        (omega / self.resolution).round().max(0.0) as usize
    }

    /// Recomputes the noise statistics with a different guard width.
    pub fn with_guard(mut self, guard: usize) -> Self {
        self.guard = guard;
        let (mean, sd) = noise_stats(&self.amps, |j| self.in_primary_window(j));
        self.noise_mean = mean;
        self.noise_sd = sd;
        self
    }

    fn in_primary_window(&self, j: usize) -> bool {
        j == 0 || j.abs_diff(self.primary_index) <= self.guard
    }

    /// Outside DC, the first `guard` channels and the primary window.
    fn is_candidate(&self, j: usize) -> bool {
        j > self.guard && !self.in_primary_window(j)
    }
}

/// Mean and sample standard deviation over channels not rejected by `skip`.
fn noise_stats(amps: &[f64], skip: impl Fn(usize) -> bool) -> (f64, f64) {
    let noise: Vec<f64> = amps.iter().enumerate().filter(|&(j, _)| !skip(j)).map(|(_, a)| *a).collect();
    if noise.is_empty() {
        return (0.0, 0.0);
    }
    let n = noise.len() as f64;
    let mean = noise.iter().sum::<f64>() / n;
    if noise.len() < 2 {
        return (mean, 0.0);
    }
    let var = noise.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_uniform(trace: &RabiTrace) -> Result<f64> {
    trace.validate()?;
    if trace.len() < 4 {
        return Err(Error::TooShort { have: trace.len(), need: 4 });
    }
    let dt = trace.times[1] - trace.times[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonUniformSampling { index: 1 });
    }
    for k in 2..trace.len() {
        let step = trace.times[k] - trace.times[k - 1];
        if (step - dt).abs() > SPACING_TOL * dt + 16.0 * f64::EPSILON * trace.times[k].abs() {
            return Err(Error::NonUniformSampling { index: k });
        }
    }
    Ok(dt)
}

/// One-sided DFT magnitudes by direct summation against an exact twiddle table.
fn direct_magnitudes(p: &[f64]) -> Vec<f64> {
    let k_len = p.len();
    let twiddle: Vec<Complex64> = (0..k_len)
        .map(|m| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * m as f64 / k_len as f64))
        .collect();
    (0..=k_len / 2)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, x) in p.iter().enumerate() {
                acc += twiddle[(j * k) % k_len] * x;
            }
            acc.norm() / k_len as f64
        })
        .collect()
}

fn argmax_non_dc(amps: &[f64]) -> usize {
    let mut best = 1;
    for j in 2..amps.len() {
        if amps[j] > amps[best] {
            best = j;
        }
    }
    best
}

/// Normalized one-sided amplitude spectrum with the default guard width.
pub fn dft(trace: &RabiTrace) -> Result<Spectrum> {
    let dt = check_uniform(trace)?;
    let k_len = trace.len();
    let amps = direct_magnitudes(&trace.populations);
    let resolution = 2.0 * std::f64::consts::PI / (k_len as f64 * dt);
    let freqs = (0..amps.len()).map(|j| j as f64 * resolution).collect();
    let primary_index = argmax_non_dc(&amps);
    let spec = Spectrum {
        freqs,
        amps,
        resolution,
        num_samples: k_len,
        primary_index,
        guard: DEFAULT_GUARD,
        noise_mean: 0.0,
        noise_sd: 0.0,
    };
    Ok(spec.with_guard(DEFAULT_GUARD))
}

pub fn peak_stats(spec: &Spectrum) -> PeakStats {
    PeakStats {
        h0: spec.h0(),
        h01: spec.h01(),
        omega_p: spec.omega_p(),
        noise_mean: spec.noise_mean,
        noise_sd: spec.noise_sd,
    }
}

/// Sharpness of the line at `p`: `(2F_p - F_{p-1} - F_{p+1}) / (F_{p-1} + F_{p+1})`.
///
/// Past the last channel the lower neighbour stands in for the missing one;
/// the returned flag reports that. The denominator is floored at
/// `1e-12 F_p` so exact integer-period records share one finite value.
pub fn trial_function(amps: &[f64], p: usize) -> (f64, bool) {
    let lower = amps[p - 1];
    let (upper, clamped) = match amps.get(p + 1) {
        Some(&a) => (a, false),
        None => (lower, true),
    };
    let den = (lower + upper).max(1e-12 * amps[p]);
    if den == 0.0 {
        return (0.0, clamped);
    }
    ((2.0 * amps[p] - lower - upper) / den, clamped)
}

/// Result of the truncation search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatch {
    pub trace: RabiTrace,
    /// Kept prefix length K'.
    pub kept: usize,
    /// Trial function of the untruncated record.
    pub trial_full: f64,
    /// Trial function of the kept prefix.
    pub trial_kept: f64,
    /// A neighbour of the primary channel fell beyond the last channel.
    pub edge_clamped: bool,
    /// The record showed no oscillation and was returned unchanged.
    pub no_oscillation: bool,
}

struct PrefixScanner {
    planner: FftPlanner<f64>,
    buf: Vec<Complex64>,
}

impl PrefixScanner {
    fn new() -> Self {
        Self { planner: FftPlanner::new(), buf: Vec::new() }
    }

    fn magnitudes(&mut self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        self.buf.clear();
        self.buf.extend(p.iter().map(|&x| Complex64::new(x, 0.0)));
        self.planner.plan_fft_forward(n).process(&mut self.buf);
        self.buf[..=n / 2].iter().map(|c| c.norm() / n as f64).collect()
    }
}

/// How far back phase matching may cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchOptions {
    /// Longest tail, in Rabi periods, that may be dropped. `None` scans every
    /// prefix down to four periods.
    pub max_trim_periods: Option<f64>,
}

impl Default for PhaseMatchOptions {
    fn default() -> Self {
        Self { max_trim_periods: Some(1.0) }
    }
}

/// Truncates the record to the prefix whose spectrum has the sharpest
/// primary line, dropping at most one Rabi period.
pub fn phase_match(trace: &RabiTrace) -> Result<PhaseMatch> {
    phase_match_with(trace, PhaseMatchOptions::default())
}

/// Phase matching with an explicit search window.
///
/// The Rabi period comes from the primary channel of the full record. Every
/// prefix in the window, and never shorter than four periods, is scanned and
/// the longest prefix among those with the highest trial value wins. Records
/// shorter than five periods are rejected.
pub fn phase_match_with(trace: &RabiTrace, opts: PhaseMatchOptions) -> Result<PhaseMatch> {
    let dt = check_uniform(trace)?;
    let k_len = trace.len();
    let mut scanner = PrefixScanner::new();
    let full = scanner.magnitudes(&trace.populations);
    let p_full = argmax_non_dc(&full);
    let (trial_full, clamp_full) = trial_function(&full, p_full);

    if full[p_full] <= FLAT_THRESHOLD * full[0].max(1.0) {
        return Ok(PhaseMatch {
            trace: trace.clone(),
            kept: k_len,
            trial_full,
            trial_kept: trial_full,
            edge_clamped: clamp_full,
            no_oscillation: true,
        });
    }

    let period = k_len as f64 * dt / p_full as f64;
    let need = (5.0 * period / dt).ceil() as usize;
    if k_len < need {
        return Err(Error::TooShort { have: k_len, need });
    }
    let mut k_min = ((4.0 * period / dt).ceil() as usize).clamp(4, k_len);
    if let Some(trim) = opts.max_trim_periods {
        let tail = (trim.max(0.0) * period / dt).ceil() as usize;
        k_min = k_min.max(k_len.saturating_sub(tail));
    }

    let mut trials = Vec::with_capacity(k_len - k_min + 1);
    for kp in k_min..=k_len {
        let amps = if kp == k_len { full.clone() } else { scanner.magnitudes(&trace.populations[..kp]) };
        trials.push(trial_function(&amps, argmax_non_dc(&amps)));
    }
    let best = trials.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - TRIAL_TIE_TOL * best.abs();
    let pick = trials.iter().rposition(|t| t.0 >= threshold).expect("non-empty scan");
    let kept = k_min + pick;
    let (trial_kept, edge_clamped) = trials[pick];
    Ok(PhaseMatch {
        trace: trace.prefix(kept),
        kept,
        trial_full,
        trial_kept,
        edge_clamped,
        no_oscillation: false,
    })
}

/// Blind third-peak test: does the largest channel outside DC, the primary
/// line and their guards rise above `noise_mean + 3 noise_sd`?
///
/// The candidate is removed from the noise window it is compared against.
/// Noise maxima grow with the channel count, so on long records this fires on
/// pure projection noise; [`third_peak_test_at`] is the calibrated variant.
pub fn third_peak_test(spec: &Spectrum) -> bool {
    let candidate = (0..spec.amps.len())
        .filter(|&j| spec.is_candidate(j))
        .max_by(|&a, &b| spec.amps[a].total_cmp(&spec.amps[b]).then(b.cmp(&a)));
    candidate.is_some_and(|c| exceeds_floor(spec, c))
}

/// Third-peak test at a known transition frequency.
///
/// Returns `None` when `omega` falls in DC's guard, the primary window or
/// beyond the last channel, where a line cannot be told apart.
pub fn third_peak_test_at(spec: &Spectrum, omega: f64) -> Option<bool> {
    let c = spec.channel_of(omega);
    (c < spec.amps.len() && spec.is_candidate(c)).then(|| exceeds_floor(spec, c))
}

/// Whether `omega` lands on a channel that [`third_peak_test_at`] can test.
pub fn is_resolvable(spec: &Spectrum, omega: f64) -> bool {
    let c = spec.channel_of(omega);
    c < spec.amps.len() && spec.is_candidate(c)
}

fn exceeds_floor(spec: &Spectrum, c: usize) -> bool {
    let (mean, sd) = noise_stats(&spec.amps, |j| spec.in_primary_window(j) || j == c);
    spec.amps[c] - mean - 3.0 * sd > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trace_of(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> RabiTrace {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let populations = times.iter().map(|&t| f(t)).collect();
        RabiTrace { times, populations, ensemble_size: 0, seed: 0 }
    }

    #[test]
    fn constant_trace_is_pure_dc() {
        let s = dft(&trace_of(|_| 1.0, 0.1, 64)).unwrap();
        assert!((s.amps[0] - 1.0).abs() < 1e-14);
        assert!(s.amps[1..].iter().all(|a| *a < 1e-12));
    }

    #[test]
    fn cosine_with_integer_periods() {
        // 8 periods of 25 samples
        let w = 2.0 * PI / 2.5;
        let s = dft(&trace_of(|t| 0.5 + 0.5 * (w * t).cos(), 0.1, 200)).unwrap();
        assert!((s.h0() - 0.5).abs() < 1e-12);
        assert_eq!(s.primary_index, 8);
        assert!((s.h01() - 0.25).abs() < 1e-12);
        assert!((s.omega_p() - w).abs() < 1e-12);
        for (j, a) in s.amps.iter().enumerate() {
            if j != 0 && j != 8 {
                assert!(*a < 1e-12, "channel {j}: {a}");
            }
        }
        assert!(s.noise_sd < 1e-12);
    }

    #[test]
    fn dc_is_mean() {
        let p = [0.3, 0.9, 0.1, 0.4, 0.55, 0.0, 1.0];
        let tr = trace_of(|t| p[(t / 0.5).round() as usize], 0.5, p.len());
        let s = dft(&tr).unwrap();
        assert!((s.amps[0] - p.iter().sum::<f64>() / 7.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_irregular_sampling() {
        let mut tr = trace_of(|_| 1.0, 0.1, 16);
        tr.times[7] += 0.01;
        assert!(matches!(dft(&tr), Err(Error::NonUniformSampling { index: 7 })));
        assert!(matches!(dft(&trace_of(|_| 1.0, 0.1, 3)), Err(Error::TooShort { .. })));
    }

    #[test]
    fn direct_sum_matches_fft() {
        let tr = trace_of(|t| 0.4 + 0.3 * (1.3 * t).cos() + 0.1 * (3.1 * t).sin(), 0.2, 97);
        let direct = dft(&tr).unwrap().amps;
        let fast = PrefixScanner::new().magnitudes(&tr.populations);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn matched_tone_is_left_alone() {
        let w = 2.0 * PI;
        let tr = trace_of(|t| 0.5 + 0.5 * (w * t).cos(), 0.05, 600);
        let pm = phase_match(&tr).unwrap();
        assert_eq!(pm.kept, 600);
        assert!(!pm.no_oscillation);
    }

    #[test]
    fn half_period_tail_is_cut() {
        let w = 2.0 * PI;
        let tr = trace_of(|t| 0.5 + 0.5 * (w * t).cos(), 0.05, 610);
        let pm = phase_match(&tr).unwrap();
        assert_eq!(pm.kept, 600);
        assert!(pm.trial_kept > pm.trial_full);
    }

    #[test]
    fn full_scan_reaches_four_periods() {
        // a weak incommensurate line makes short prefixes look sharper
        let w = 2.0 * PI;
        let tr = trace_of(|t| 0.6 + 0.2 * (w * t).cos() + 0.01 * (2.37 * w * t).cos(), 0.05, 600);
        let all = phase_match_with(&tr, PhaseMatchOptions { max_trim_periods: None }).unwrap();
        let near = phase_match(&tr).unwrap();
        assert!(all.kept >= 80 && all.trial_kept >= near.trial_kept);
        assert!(near.kept >= 580);
    }

    #[test]
    fn too_few_periods() {
        let w = 2.0 * PI;
        let tr = trace_of(|t| 0.5 + 0.5 * (w * t).cos(), 0.05, 80);
        assert!(matches!(phase_match(&tr), Err(Error::TooShort { have: 80, .. })));
    }

    #[test]
    fn flat_trace_passes_through() {
        let pm = phase_match(&trace_of(|_| 1.0, 0.1, 50)).unwrap();
        assert!(pm.no_oscillation);
        assert_eq!(pm.kept, 50);
    }

    #[test]
    fn trial_function_at_last_channel() {
        let (p, clamped) = trial_function(&[1.0, 0.1, 0.5], 2);
        assert!(clamped);
        assert!((p - (1.0 - 0.2) / 0.2).abs() < 1e-12);
    }

    #[test]
    fn tones_merge_below_resolution() {
        // resolution 2 pi / 20; tones 0.4 dw apart share a channel
        let dw = 2.0 * PI / 20.0;
        let w = 20.0 * dw;
        let merged = dft(&trace_of(|t| 0.5 + 0.2 * (w * t).cos() + 0.05 * ((w + 0.4 * dw) * t).cos(), 0.1, 200))
            .unwrap();
        let split = dft(&trace_of(|t| 0.5 + 0.2 * (w * t).cos() + 0.05 * ((w + 3.0 * dw) * t).cos(), 0.1, 200))
            .unwrap();
        assert!(third_peak_test_at(&split, w + 3.0 * dw).unwrap());
        assert_eq!(merged.primary_index, 20);
        assert!(!is_resolvable(&merged, w + 0.4 * dw));
        assert!(merged.h01() > 0.1 + 0.005);
    }

    #[test]
    fn guard_controls_noise_window() {
        let tr = trace_of(|t| 0.5 + 0.25 * (1.0 * t).cos() + 0.01 * (7.7 * t).sin(), 0.1, 300);
        let s = dft(&tr).unwrap();
        let wide = s.clone().with_guard(4);
        assert_eq!(wide.guard, 4);
        assert_ne!(wide.noise_sd, s.noise_sd);
    }
}
