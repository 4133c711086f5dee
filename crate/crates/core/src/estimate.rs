// SPDX-License-Identifier: Apache-2.0

//! Leakage bounds and their uncertainties from measured peak heights.
//!
//! `noise_sd` is the standard deviation of the off-peak channels. Each bound
//! carries `3 noise_sd / (2 sqrt(radicand))`, the one-sigma spread propagated
//! through `h0 + 2 h01` (the 3 counts the DC and the two Rabi lines).
//! Agreement is judged at three of these.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RabiTrace;
use crate::spectral::{dft, peak_stats, phase_match, PeakStats, Spectrum};

/// Conditions met while producing an estimate. None of them is an error;
/// all of them are written out with the numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// `h0 + 2 h01 > 1`; the lower bound was clamped to zero.
    pub eps_low_clamped: bool,
    /// `h0 + 2 h01 > 1`; the upper bound was clamped to zero.
    pub eps_high_clamped: bool,
    /// `2 h0 + 4 h01 - 1 <= 0`; no upper bound exists.
    pub eps_high_undefined: bool,
    /// The primary line sat on the last channel during phase matching.
    pub edge_clamped: bool,
    /// The trace did not oscillate and was analysed untruncated.
    pub no_oscillation: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.names().next().is_some()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> {
        [
            (self.eps_low_clamped, "eps_low_clamped"),
            (self.eps_high_clamped, "eps_high_clamped"),
            (self.eps_high_undefined, "eps_high_undefined"),
            (self.edge_clamped, "edge_clamped"),
            (self.no_oscillation, "no_oscillation"),
        ]
        .into_iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| name)
    }

    /// `|`-separated names, empty when nothing is set.
    pub fn to_field(&self) -> String {
        self.names().collect::<Vec<_>>().join("|")
    }

    pub fn from_field(s: &str) -> Result<Self> {
        let mut f = Flags::default();
        for name in s.split('|').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "eps_low_clamped" => f.eps_low_clamped = true,
                "eps_high_clamped" => f.eps_high_clamped = true,
                "eps_high_undefined" => f.eps_high_undefined = true,
                "edge_clamped" => f.edge_clamped = true,
                "no_oscillation" => f.no_oscillation = true,
                other => {
                    return Err(Error::Malformed { field: "flags".into(), reason: format!("unknown flag `{other}`") })
                }
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageEstimate {
    pub eps_low: f64,
    /// `None` when the radicand is not positive.
    pub eps_high: Option<f64>,
    pub d_eps_low: f64,
    pub d_eps_high: Option<f64>,
    pub h0: f64,
    pub h01: f64,
    pub noise_sd: f64,
    pub flags: Flags,
}

/// Bounds from the DC height, the primary height and the noise spread.
pub fn estimate(h0: f64, h01: f64, noise_sd: f64) -> Result<LeakageEstimate> {
    let in_range = |x: f64| (0.0..=1.0).contains(&x);
    if !in_range(h0) || !in_range(h01) {
        return Err(Error::OutOfRangePeaks { h0, h01 });
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::Malformed { field: "noise_sd".into(), reason: format!("{noise_sd} is not a valid spread") });
    }
    let mut flags = Flags::default();
    let s = h0 + 2.0 * h01;

    let mut eps_low = 1.0 - s.sqrt();
    if eps_low < 0.0 {
        eps_low = 0.0;
        flags.eps_low_clamped = true;
    }
    let d_eps_low = if s > 0.0 { 3.0 * noise_sd / (2.0 * s.sqrt()) } else { f64::INFINITY };

    let radicand = 2.0 * s - 1.0;
    let (eps_high, d_eps_high) = if radicand > 0.0 {
        let mut eps = 0.5 * (1.0 - radicand.sqrt());
        if eps < 0.0 {
            eps = 0.0;
            flags.eps_high_clamped = true;
        }
        (Some(eps), Some(3.0 * noise_sd / (2.0 * radicand.sqrt())))
    } else {
        flags.eps_high_undefined = true;
        (None, None)
    };

    Ok(LeakageEstimate { eps_low, eps_high, d_eps_low, d_eps_high, h0, h01, noise_sd, flags })
}

pub fn estimate_from_stats(stats: &PeakStats) -> Result<LeakageEstimate> {
    estimate(stats.h0, stats.h01, stats.noise_sd)
}

/// Significant leakage by the confinement equations:
/// `eps_low_analytic - 6 d_eps_low > 0`.
pub fn significance_confinement(est: &LeakageEstimate, eps_low_analytic: f64) -> bool {
    eps_low_analytic - 6.0 * est.d_eps_low > 0.0
}

/// Everything the trace pipeline produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// Samples kept by phase matching.
    pub kept: usize,
    pub trial_full: f64,
    pub trial_kept: f64,
    pub stats: PeakStats,
    pub resolution: f64,
    pub estimate: LeakageEstimate,
    #[serde(skip)]
    pub spectrum: Option<Spectrum>,
}

/// Phase match, transform, read the peaks and bound the leakage.
pub fn analyze_trace(trace: &RabiTrace) -> Result<Analysis> {
    analyze_trace_with_guard(trace, crate::spectral::DEFAULT_GUARD)
}

pub fn analyze_trace_with_guard(trace: &RabiTrace, guard: usize) -> Result<Analysis> {
    let pm = phase_match(trace)?;
    let spectrum = dft(&pm.trace)?.with_guard(guard);
    let stats = peak_stats(&spectrum);
    let mut est = estimate_from_stats(&stats)?;
    est.flags.edge_clamped = pm.edge_clamped;
    est.flags.no_oscillation = pm.no_oscillation;
    Ok(Analysis {
        kept: pm.kept,
        trial_full: pm.trial_full,
        trial_kept: pm.trial_kept,
        stats,
        resolution: spectrum.resolution,
        estimate: est,
        spectrum: Some(spectrum),
    })
}
