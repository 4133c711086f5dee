// SPDX-License-Identifier: Apache-2.0

//! Markovian decoherence of a perfectly confined qubit.
//!
//! The qubit Hamiltonian is `(d/2)(cos(theta) Z + sin(theta) X)` with X, Y and
//! Z jump operators at rates `gx`, `gy`, `gz`. Writing
//! `rho = I/2 + x X + y Y + z Z`, the Bloch vector obeys `dS/dt = A S` from
//! `S(0) = (0, 0, 1/2)` and the ground population is `1/2 + z`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sim::RabiTrace;

pub const DEFAULT_REGIME_FACTOR: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceConfig {
    pub theta: f64,
    /// Rabi angular frequency scale.
    #[serde(rename = "d")]
    pub gap: f64,
    #[serde(rename = "gx")]
    pub gamma_x: f64,
    #[serde(rename = "gy")]
    pub gamma_y: f64,
    #[serde(rename = "gz")]
    pub gamma_z: f64,
    /// The Lorentzian forms need `d > regime_factor * max rate`.
    #[serde(default = "default_regime_factor")]
    pub regime_factor: f64,
}

fn default_regime_factor() -> f64 {
    DEFAULT_REGIME_FACTOR
}

impl DecoherenceConfig {
    pub fn new(theta: f64, gap: f64, gamma_x: f64, gamma_y: f64, gamma_z: f64) -> Result<Self> {
        let cfg = Self { theta, gap, gamma_x, gamma_y, gamma_z, regime_factor: DEFAULT_REGIME_FACTOR };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Equal rates `g` on all three channels.
    pub fn isotropic(theta: f64, gap: f64, g: f64) -> Result<Self> {
        Self::new(theta, gap, g, g, g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::Malformed { field: field.into(), reason });
        if !self.theta.is_finite() {
            return bad("theta", "must be finite".into());
        }
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return bad("d", format!("must be positive, got {}", self.gap));
        }
        for (name, g) in [("gx", self.gamma_x), ("gy", self.gamma_y), ("gz", self.gamma_z)] {
            if !(g.is_finite() && g >= 0.0) {
                return bad(name, format!("rates must be non-negative, got {g}"));
            }
        }
        if !(self.regime_factor.is_finite() && self.regime_factor > 0.0) {
            return bad("regime_factor", format!("must be positive, got {}", self.regime_factor));
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.gamma_x.max(self.gamma_y).max(self.gamma_z)
    }

    /// Whether the rates are small enough for the Lorentzian forms.
    pub fn in_lorentzian_regime(&self) -> bool {
        self.gap > self.regime_factor * self.max_rate()
    }

    /// Width of the DC line.
    pub fn gamma_alpha(&self) -> f64 {
        let c2 = self.theta.cos().powi(2);
        2.0 * (self.gamma_y + self.gamma_z + c2 * (self.gamma_x - self.gamma_z))
    }

    /// Width of the Rabi line.
    pub fn gamma_beta(&self) -> f64 {
        let s2 = self.theta.sin().powi(2);
        self.gamma_x * (1.0 + s2) + self.gamma_y + self.gamma_z * (2.0 - s2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub time: f64,
}

impl BlochState {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Ground-state population `1/2 + z`.
    pub fn population(&self) -> f64 {
        0.5 + self.z
    }
}

pub fn bloch_matrix(cfg: &DecoherenceConfig) -> Matrix3<f64> {
    let (s, c) = cfg.theta.sin_cos();
    let d = cfg.gap;
    let (gx, gy, gz) = (cfg.gamma_x, cfg.gamma_y, cfg.gamma_z);
    Matrix3::new(
        -2.0 * (gy + gz),
        -d * c,
        0.0,
        d * c,
        -2.0 * (gx + gz),
        -d * s,
        0.0,
        d * s,
        -2.0 * (gx + gy),
    )
}

const INITIAL: [f64; 3] = [0.0, 0.0, 0.5];

/// Bloch vectors on a uniform grid starting at `t = 0`, stepped with the
/// exact propagator `exp(A dt)`.
pub fn bloch_states(cfg: &DecoherenceConfig, times: &[f64]) -> Result<Vec<BlochState>> {
    cfg.validate()?;
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    for (k, t) in times.iter().enumerate() {
        let expect = times[0] + k as f64 * dt;
        if (t - expect).abs() > 1e-9 * dt.abs().max(f64::MIN_POSITIVE) + 16.0 * f64::EPSILON * t.abs() {
            return Err(Error::NonUniformSampling { index: k });
        }
    }
    let a = bloch_matrix(cfg);
    let step = (a * dt).exp();
    let mut s = (a * times[0]).exp() * Vector3::from(INITIAL);
    let mut out = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            s = step * s;
        }
        out.push(BlochState { x: s[0], y: s[1], z: s[2], time: t });
    }
    Ok(out)
}

/// Noiseless ground-population trace `p_k = 1/2 + z(t_k)`.
pub fn evolve_bloch(cfg: &DecoherenceConfig, times: &[f64]) -> Result<RabiTrace> {
    let states = bloch_states(cfg, times)?;
    Ok(RabiTrace {
        times: times.to_vec(),
        populations: states.iter().map(|s| s.population().clamp(0.0, 1.0)).collect(),
        ensemble_size: 0,
        seed: 0,
    })
}

/// One-sided transform `int_0^inf z(t) exp(-i w t) dt` from the resolvent
/// `S(w) = -(A - i w I)^{-1} S(0)`.
pub fn analytic_spectrum(cfg: &DecoherenceConfig, omegas: &[f64]) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let a = bloch_matrix(cfg).map(|x| Complex64::new(x, 0.0));
    let s0 = Vector3::from(INITIAL).map(|x| Complex64::new(x, 0.0));
    let scale = a.norm().max(cfg.gap);
    omegas
        .iter()
        .map(|&w| {
            let m = a - Matrix3::from_diagonal_element(Complex64::new(0.0, w));
            let lu = m.lu();
            if lu.determinant().norm() <= 1e-14 * scale.powi(3) {
                return Err(Error::SingularResolvent(w));
            }
            let sol = lu.solve(&s0).ok_or(Error::SingularResolvent(w))?;
            Ok(-sol[2])
        })
        .collect()
}

/// Lorentzian approximations to the DC and Rabi lines of `Re F+[z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianPeaks {
    pub gamma_alpha: f64,
    pub gamma_beta: f64,
    /// `cos^2(theta) / 2`.
    pub dc_amplitude: f64,
    /// `sin^2(theta) / 4`.
    pub rabi_amplitude: f64,
    /// Weight of the delta line at DC from measuring the ground projector.
    pub dc_offset: f64,
    pub gap: f64,
}

impl LorentzianPeaks {
    pub fn dc_line(&self, w: f64) -> f64 {
        self.dc_amplitude * self.gamma_alpha / (w * w + self.gamma_alpha.powi(2))
    }

    /// The line centred on `+d`.
    pub fn rabi_line(&self, w: f64) -> f64 {
        let x = w - self.gap;
        self.rabi_amplitude * self.gamma_beta / (x * x + self.gamma_beta.powi(2))
    }
}

pub fn lorentzian_peaks(cfg: &DecoherenceConfig) -> Result<LorentzianPeaks> {
    cfg.validate()?;
    if !cfg.in_lorentzian_regime() {
        return Err(Error::RegimeViolation { gap: cfg.gap, max_rate: cfg.max_rate(), factor: cfg.regime_factor });
    }
    let (s, c) = cfg.theta.sin_cos();
    Ok(LorentzianPeaks {
        gamma_alpha: cfg.gamma_alpha(),
        gamma_beta: cfg.gamma_beta(),
        dc_amplitude: c * c / 2.0,
        rabi_amplitude: s * s / 4.0,
        dc_offset: 0.5,
        gap: cfg.gap,
    })
}

/// Heights collected inside a window of half-width `eta` around each line:
/// `h0 = 1/2 + (cos^2/pi) atan(eta/Ga)`, `h01 = (sin^2/2pi) atan(eta/Gb)`.
///
/// These are `1/pi` times the Lorentzian integrals, the scaling under which
/// the areas sum to one in the zero-rate limit. Zero widths give the full
/// area.
pub fn peak_area(cfg: &DecoherenceConfig, eta: f64) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Malformed { field: "eta".into(), reason: format!("must be positive, got {eta}") });
    }
    let (s, c) = cfg.theta.sin_cos();
    let atan = |width: f64| if width == 0.0 { PI / 2.0 } else { (eta / width).atan() };
    let h0 = 0.5 + c * c / PI * atan(cfg.gamma_alpha());
    let h01 = s * s / (2.0 * PI) * atan(cfg.gamma_beta());
    Ok((h0, h01))
}

/// Coarsest resolution a record can have while keeping the upper leakage
/// bound at or below `zeta` under linewidth `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionLimit {
    /// Angular channel width.
    pub delta_omega: f64,
    /// Ordinary-frequency channel width `delta_omega / 2 pi`.
    pub delta_f: f64,
    /// Observation time `2 pi / delta_omega`; longer records resolve the
    /// line too finely.
    pub t_ob: f64,
}

/// Solves `pi (1 - 2 zeta)^2 / 2 = atan(dw / gamma)` for `dw`.
pub fn max_resolution(gamma: f64, zeta: f64) -> Result<ResolutionLimit> {
    if !(zeta > 0.0 && zeta < 0.5) {
        return Err(Error::DegenerateTarget(zeta));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Malformed { field: "gamma".into(), reason: format!("must be positive, got {gamma}") });
    }
    // pi/2 - pi (1 - 2z)^2 / 2 = 2 pi z (1 - z), so tan(...) = 1 / tan(2 pi z (1 - z))
    let delta_omega = gamma / (2.0 * PI * zeta * (1.0 - zeta)).tan();
    Ok(ResolutionLimit { delta_omega, delta_f: delta_omega / (2.0 * PI), t_ob: 2.0 * PI / delta_omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn undamped_matrix() {
        let cfg = DecoherenceConfig::new(FRAC_PI_2, 1.3, 0.0, 0.0, 0.0).unwrap();
        let a = bloch_matrix(&cfg);
        assert!(a.diagonal().iter().all(|x| *x == 0.0));
        assert!((a + a.transpose()).norm() < 1e-15);
        let ev = a.map(|x| Complex64::new(x, 0.0)).eigenvalues().unwrap();
        let mut im: Vec<f64> = ev.iter().map(|e| e.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.3).abs() < 1e-12 && im[1].abs() < 1e-12 && (im[2] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn trace_of_matrix() {
        let cfg = DecoherenceConfig::new(0.7, 1.0, 0.1, 0.02, 0.3).unwrap();
        assert!((bloch_matrix(&cfg).trace() + 4.0 * 0.42).abs() < 1e-15);
        let flat = DecoherenceConfig::new(0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(bloch_matrix(&flat).row(2).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn undamped_rabi_oscillation() {
        let cfg = DecoherenceConfig::new(FRAC_PI_2, 1.0, 0.0, 0.0, 0.0).unwrap();
        let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.05).collect();
        let tr = evolve_bloch(&cfg, &times).unwrap();
        assert_eq!(tr.populations[0], 1.0);
        for (t, p) in times.iter().zip(&tr.populations) {
            assert!((p - 0.5 * (1.0 + t.cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn isotropic_envelope() {
        let g = 0.01;
        let cfg = DecoherenceConfig::isotropic(0.4, 1.0, g).unwrap();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.25).collect();
        for s in bloch_states(&cfg, &times).unwrap() {
            assert!((s.norm() - 0.5 * (-4.0 * g * s.time).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(DecoherenceConfig::new(0.0, 1.0, -1e-3, 0.0, 0.0).is_err());
        assert!(DecoherenceConfig::new(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        let cfg = DecoherenceConfig::new(0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(evolve_bloch(&cfg, &[0.0, 0.1, 0.3]), Err(Error::NonUniformSampling { index: 2 })));
    }

    #[test]
    fn widths_at_special_angles() {
        let cfg = DecoherenceConfig::new(FRAC_PI_2, 1.0, 1e-3, 2e-3, 3e-3).unwrap();
        assert!((cfg.gamma_alpha() - 2.0 * 5e-3).abs() < 1e-15);
        assert!((cfg.gamma_beta() - (2e-3 + 2e-3 + 3e-3)).abs() < 1e-15);
        let z = DecoherenceConfig { theta: 0.0, ..cfg };
        assert!((z.gamma_alpha() - 2.0 * 3e-3).abs() < 1e-15);
    }

    #[test]
    fn singular_without_damping() {
        let cfg = DecoherenceConfig::new(FRAC_PI_2, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(analytic_spectrum(&cfg, &[0.0]), Err(Error::SingularResolvent(_))));
        assert!(analytic_spectrum(&cfg, &[0.5]).is_ok());
    }

    #[test]
    fn no_rabi_weight_along_z() {
        // only the tail of the DC line remains near w = d
        let cfg = DecoherenceConfig::new(0.0, 1.0, 1e-3, 1e-3, 1e-3).unwrap();
        let lp = lorentzian_peaks(&cfg).unwrap();
        let grid: Vec<f64> = (0..=100).map(|k| 0.5 + k as f64 * 0.01).collect();
        let f = analytic_spectrum(&cfg, &grid).unwrap();
        for (w, pair) in grid.windows(2).zip(f.windows(2)) {
            assert!(pair[1].re < pair[0].re, "rise at {}", w[1]);
        }
        assert!((f[50].re - lp.dc_line(1.0)).abs() < 1e-6 * lp.dc_line(1.0));
    }

    #[test]
    fn regime_violation() {
        let cfg = DecoherenceConfig::new(0.3, 1.0, 0.05, 0.0, 0.0).unwrap();
        assert!(matches!(lorentzian_peaks(&cfg), Err(Error::RegimeViolation { .. })));
    }

    #[test]
    fn lorentzians_match_real_part() {
        let cfg = DecoherenceConfig::new(1.1, 1.0, 4e-4, 7e-4, 2e-4).unwrap();
        let lp = lorentzian_peaks(&cfg).unwrap();
        let near_d: Vec<f64> = (-20..=20).map(|k| 1.0 + k as f64 * 2e-4).collect();
        let f = analytic_spectrum(&cfg, &near_d).unwrap();
        for (w, v) in near_d.iter().zip(&f) {
            let l = lp.rabi_line(*w);
            assert!((v.re - l).abs() < 0.05 * l, "w={w}: {} vs {l}", v.re);
        }
        let near_0: Vec<f64> = (-20..=20).map(|k| k as f64 * 2e-4).collect();
        let f = analytic_spectrum(&cfg, &near_0).unwrap();
        for (w, v) in near_0.iter().zip(&f) {
            let l = lp.dc_line(*w);
            assert!((v.re - l).abs() < 0.05 * l, "w={w}: {} vs {l}", v.re);
        }
    }

    #[test]
    fn areas_in_the_limits() {
        let cfg = DecoherenceConfig::new(0.8, 1.0, 1e-9, 1e-9, 1e-9).unwrap();
        let (h0, h01) = peak_area(&cfg, 1.0).unwrap();
        assert!((h0 + 2.0 * h01 - 1.0).abs() < 1e-8);
        let x = DecoherenceConfig::new(FRAC_PI_2, 1.0, 1e-3, 1e-3, 1e-3).unwrap();
        let eta = x.gamma_alpha();
        assert!((peak_area(&x, eta).unwrap().0 - 0.5).abs() < 1e-16);
        assert!(peak_area(&x, 0.0).is_err());
    }

    #[test]
    fn resolution_worked_example() {
        let r = max_resolution(1e-4, 1e-8).unwrap();
        assert!((r.delta_f - 250.0).abs() < 12.5, "{}", r.delta_f);
        assert!((r.t_ob * r.delta_f - 1.0).abs() < 1e-12);
        let direct = 1e-4 * (PI * (1.0 - 2e-6_f64).powi(2) / 2.0).tan();
        let r6 = max_resolution(1e-4, 1e-6).unwrap();
        assert!((r6.delta_omega - direct).abs() < 1e-6 * direct);
        assert!(max_resolution(1e-4, 0.4999).unwrap().delta_omega < 1e-6);
        assert!(matches!(max_resolution(1e-4, 0.5), Err(Error::DegenerateTarget(_))));
        assert!(matches!(max_resolution(1e-4, 0.0), Err(Error::DegenerateTarget(_))));
    }
}
