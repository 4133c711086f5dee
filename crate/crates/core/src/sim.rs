// SPDX-License-Identifier: Apache-2.0

//! Rabi-oscillation records under a ground-state-only measurement model.
//!
//! Only |0> is detected directly. Each time point `t_k = k dt` is measured
//! `N_e` times and the recorded population is the fraction of |0> outcomes,
//! a draw from `Binomial(N_e, |<0|U(t_k)|0>|^2) / N_e`.
//!
//! Randomness comes from ChaCha8 keyed by the plan seed, with one stream per
//! time index, so every sample depends only on `(seed, k)` and the trace is
//! identical however the points are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::analytic::analytic_peaks;
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, EigenSystem, HermitianOperator};

pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 20;
pub const DEFAULT_CYCLES: f64 = 30.0;
pub const DEFAULT_ENSEMBLE_SIZE: u64 = 1024;

/// Time grid and ensemble size for one Rabi experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Sample spacing.
    pub dt: f64,
    /// Number of samples K; the observation time is `K * dt`.
    pub num_samples: usize,
    /// Repetitions per point; zero requests the noiseless trace.
    pub ensemble_size: u64,
    pub seed: u64,
    /// Rough Rabi period, when known, for the Nyquist check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_period: Option<f64>,
}

impl SamplingPlan {
    pub fn new(dt: f64, num_samples: usize, ensemble_size: u64, seed: u64) -> Result<Self> {
        let plan = Self { dt, num_samples, ensemble_size, seed, rabi_period: None };
        plan.validate()?;
        Ok(plan)
    }

    /// `samples_per_period` points per Rabi period over `cycles` periods.
    pub fn for_period(
        rabi_period: f64,
        samples_per_period: usize,
        cycles: f64,
        ensemble_size: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(rabi_period.is_finite() && rabi_period > 0.0) {
            return Err(Error::InvalidPlan(format!("Rabi period must be positive, got {rabi_period}")));
        }
        if samples_per_period == 0 {
            return Err(Error::InvalidPlan("samples per period must be positive".into()));
        }
        let dt = rabi_period / samples_per_period as f64;
        let num_samples = (cycles * samples_per_period as f64).round() as usize;
        let plan = Self { dt, num_samples, ensemble_size, seed, rabi_period: Some(rabi_period) };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan whose period is the dominant transition of `h`.
    pub fn for_hamiltonian(
        h: &HermitianOperator,
        samples_per_period: usize,
        cycles: f64,
        ensemble_size: u64,
        seed: u64,
    ) -> Result<Self> {
        let period = rabi_period(h).ok_or_else(|| {
            Error::InvalidPlan("Hamiltonian has no oscillating transition to set the period".into())
        })?;
        Self::for_period(period, samples_per_period, cycles, ensemble_size, seed)
    }

    pub fn observation_time(&self) -> f64 {
        self.num_samples as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.num_samples).map(|k| k as f64 * self.dt).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidPlan(format!("dt must be positive, got {}", self.dt)));
        }
        if self.num_samples < 2 {
            return Err(Error::InvalidPlan(format!("need at least 2 samples, got {}", self.num_samples)));
        }
        if let Some(period) = self.rabi_period {
            if self.dt > period / 2.0 * (1.0 + 1e-12) {
                return Err(Error::InvalidPlan(format!(
                    "dt = {} violates the Nyquist limit T_Rabi/2 = {}",
                    self.dt,
                    period / 2.0
                )));
            }
        }
        Ok(())
    }
}

/// Period `2 pi / omega01` of the dominant transition, if it oscillates.
pub fn rabi_period(h: &HermitianOperator) -> Option<f64> {
    let peaks = analytic_peaks(h);
    let p = peaks.primary();
    (p.height > 0.0 && p.frequency > 0.0).then(|| 2.0 * std::f64::consts::PI / p.frequency)
}

/// Uniformly sampled ground-state populations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    pub populations: Vec<f64>,
    /// Repetitions per point; zero marks a noiseless trace.
    pub ensemble_size: u64,
    pub seed: u64,
}

impl RabiTrace {
    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn dt(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }

    pub fn is_ideal(&self) -> bool {
        self.ensemble_size == 0
    }

    /// First `len` samples.
    pub fn prefix(&self, len: usize) -> RabiTrace {
        let len = len.min(self.len());
        RabiTrace {
            times: self.times[..len].to_vec(),
            populations: self.populations[..len].to_vec(),
            ensemble_size: self.ensemble_size,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.populations.len() {
            return Err(Error::Malformed {
                field: "populations".into(),
                reason: format!("{} times but {} populations", self.times.len(), self.populations.len()),
            });
        }
        if let Some((k, p)) = self.populations.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Malformed { field: format!("p[{k}]"), reason: format!("{p} outside [0, 1]") });
        }
        Ok(())
    }
}

fn ideal_populations(es: &EigenSystem, times: &[f64]) -> Vec<f64> {
    // dividing by the squared total weight pins f(0) to exactly one
    let total: f64 = es.ground_weights().iter().sum();
    let norm = total * total;
    times.iter().map(|&t| (es.return_amplitude(t).norm_sqr() / norm).clamp(0.0, 1.0)).collect()
}

/// Noiseless return probabilities `|<0|U(t_k)|0>|^2`.
pub fn ideal_trace(h: &HermitianOperator, plan: &SamplingPlan) -> Result<RabiTrace> {
    plan.validate()?;
    let times = plan.times();
    let populations = ideal_populations(&eigendecompose(h), &times);
    Ok(RabiTrace { times, populations, ensemble_size: 0, seed: plan.seed })
}

/// Projection-noise-limited trace. Falls back to [`ideal_trace`] when the
/// plan's ensemble size is zero.
pub fn sample_trace(h: &HermitianOperator, plan: &SamplingPlan) -> Result<RabiTrace> {
    let ideal = ideal_trace(h, plan)?;
    if plan.ensemble_size == 0 {
        return Ok(ideal);
    }
    let populations = resample(&ideal.populations, plan.ensemble_size, plan.seed);
    Ok(RabiTrace { times: ideal.times, populations, ensemble_size: plan.ensemble_size, seed: plan.seed })
}

/// Replaces each probability by a binomial population estimate.
pub fn resample(probabilities: &[f64], ensemble_size: u64, seed: u64) -> Vec<f64> {
    let n = ensemble_size as f64;
    probabilities
        .iter()
        .enumerate()
        .map(|(k, &p)| draw_count(p, ensemble_size, seed, k as u64) as f64 / n)
        .collect()
}

fn draw_count(p: f64, ensemble_size: u64, seed: u64, index: u64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return ensemble_size;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Binomial::new(ensemble_size, p).expect("p in (0, 1)").sample(&mut rng)
}

/// SplitMix64 finalizer; derives independent child seeds from a parent seed
/// and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
