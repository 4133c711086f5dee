// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo studies built on the trace pipeline.
//!
//! Every trial is keyed by a seed derived from the campaign seed and the trial
//! index, so trials can run in any order, on any number of workers, and a
//! partially finished campaign can be resumed by running the missing seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{analytic_bounds, analytic_peaks, exact_leakage, PeakSet};
use crate::decoherence::{evolve_bloch, max_resolution, DecoherenceConfig, ResolutionLimit};
use crate::error::{Error, Result};
use crate::estimate::{analyze_trace_with_guard, significance_confinement, Analysis, Flags};
use crate::families::{family, random_leaky_hamiltonian, Family};
use crate::linalg::HermitianOperator;
use crate::sim::{derive_seed, sample_trace, SamplingPlan, DEFAULT_CYCLES, DEFAULT_SAMPLES_PER_PERIOD};
use crate::spectral::{is_resolvable, third_peak_test_at, DEFAULT_GUARD};

/// Record shape shared by every sampling study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    pub ensemble_size: u64,
    pub samples_per_period: usize,
    pub cycles: f64,
    pub guard: usize,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            ensemble_size: crate::sim::DEFAULT_ENSEMBLE_SIZE,
            samples_per_period: DEFAULT_SAMPLES_PER_PERIOD,
            cycles: DEFAULT_CYCLES,
            guard: DEFAULT_GUARD,
        }
    }
}

impl TraceSettings {
    pub fn with_ensemble(self, ensemble_size: u64) -> Self {
        Self { ensemble_size, ..self }
    }

    fn plan(&self, h: &HermitianOperator, seed: u64) -> Result<SamplingPlan> {
        SamplingPlan::for_hamiltonian(h, self.samples_per_period, self.cycles, self.ensemble_size, seed)
    }

    /// Simulates and analyses one record of `h`.
    pub fn analyze(&self, h: &HermitianOperator, seed: u64) -> Result<Analysis> {
        let trace = sample_trace(h, &self.plan(h, seed)?)?;
        analyze_trace_with_guard(&trace, self.guard)
    }
}

/// One row of a campaign CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    /// Hamiltonian dimension.
    #[serde(rename = "N")]
    pub n_levels: usize,
    /// Upper bound computed from the Hamiltonian itself.
    pub eps_analytic: f64,
    pub eps_low: f64,
    pub eps_high: Option<f64>,
    pub d_eps_low: f64,
    pub d_eps_high: Option<f64>,
    pub flags: String,
}

impl TrialRecord {
    /// `|eps_high - eps_analytic|`, when an upper bound exists.
    pub fn distance(&self) -> Option<f64> {
        self.eps_high.map(|e| (e - self.eps_analytic).abs())
    }

    pub fn flags(&self) -> Result<Flags> {
        Flags::from_field(&self.flags)
    }
}

/// Analytic upper bound, or one half when the radicand is negative.
fn analytic_upper(peaks: &PeakSet) -> f64 {
    analytic_bounds(peaks).map_or(0.5, |(_, hi)| hi)
}

/// Simulate, analyse and compare against the analytic upper bound.
pub fn run_trial(h: &HermitianOperator, settings: &TraceSettings, seed: u64) -> Result<TrialRecord> {
    let analysis = settings.analyze(h, seed)?;
    let est = analysis.estimate;
    Ok(TrialRecord {
        seed,
        n_levels: h.dim(),
        eps_analytic: analytic_upper(&analytic_peaks(h)),
        eps_low: est.eps_low,
        eps_high: est.eps_high,
        d_eps_low: est.d_eps_low,
        d_eps_high: est.d_eps_high,
        flags: est.flags.to_field(),
    })
}

/// Seed of trial `index` in a campaign seeded with `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    derive_seed(base, index)
}

/// One validation trial: a fresh random leaky Hamiltonian drawn from `seed`,
/// sampled with a noise seed derived from it.
pub fn validation_trial(settings: &TraceSettings, seed: u64) -> Result<TrialRecord> {
    let h = random_leaky_hamiltonian(seed);
    let mut rec = run_trial(&h, settings, derive_seed(seed, NOISE_TAG))?;
    rec.seed = seed;
    Ok(rec)
}

/// Tag separating a trial's noise stream from its Hamiltonian draw.
const NOISE_TAG: u64 = 0x6e6f_6973_65;

/// Outcome of one trial inside a parallel batch.
pub type TrialOutcome = std::result::Result<TrialRecord, (u64, Error)>;

/// Runs `trial` for each seed on the current rayon pool, in seed order.
pub fn run_batch<F>(seeds: &[u64], trial: F) -> Vec<TrialOutcome>
where
    F: Fn(u64) -> Result<TrialRecord> + Sync,
{
    seeds.par_iter().map(|&s| trial(s).map_err(|e| (s, e))).collect()
}

/// Summary of a validation or distance study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationStats {
    pub n_trials: usize,
    /// `|eps_high - eps_analytic|` for trials with a defined upper bound.
    pub distances: Vec<f64>,
    /// `d_eps_high` for the same trials.
    pub errors: Vec<f64>,
    /// Trials without an upper bound; counted as unsuccessful.
    pub n_undefined: usize,
    /// Fraction of trials with `d - 3 dd <= 0`.
    pub ratio: f64,
    pub mean_error: f64,
    /// Fraction of trials with `d <= 3 mean(dd)`.
    pub coverage_of_mean: f64,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over `[0, max]`.
pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let top = values.iter().copied().fold(0.0, f64::max);
    let width = if top > 0.0 { top / bins as f64 } else { 1.0 / bins as f64 };
    let edges = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for v in values {
        let i = ((v / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

pub const HISTOGRAM_BINS: usize = 20;

pub fn summarize(records: &[TrialRecord]) -> ValidationStats {
    let mut distances = Vec::with_capacity(records.len());
    let mut errors = Vec::with_capacity(records.len());
    let mut successes = 0usize;
    for r in records {
        if let (Some(d), Some(dd)) = (r.distance(), r.d_eps_high) {
            distances.push(d);
            errors.push(dd);
            if d - 3.0 * dd <= 0.0 {
                successes += 1;
            }
        }
    }
    let n = records.len();
    let mean_error = if errors.is_empty() { 0.0 } else { errors.iter().sum::<f64>() / errors.len() as f64 };
    let covered = distances.iter().filter(|&&d| d <= 3.0 * mean_error).count();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    ValidationStats {
        n_trials: n,
        n_undefined: n - distances.len(),
        ratio: frac(successes),
        mean_error,
        coverage_of_mean: frac(covered),
        histogram: histogram(&distances, HISTOGRAM_BINS),
        distances,
        errors,
    }
}

/// Random-ensemble validation over `n_trials` seeds derived from `base_seed`.
pub fn validation_campaign(n_trials: u64, settings: &TraceSettings, base_seed: u64) -> Result<ValidationStats> {
    let seeds: Vec<u64> = (0..n_trials).map(|i| trial_seed(base_seed, i)).collect();
    let records = collect(run_batch(&seeds, |s| validation_trial(settings, s)))?;
    Ok(summarize(&records))
}

/// Repeated noisy records of one known Hamiltonian.
pub fn distance_study(
    h: &HermitianOperator,
    n_runs: u64,
    settings: &TraceSettings,
    base_seed: u64,
) -> Result<ValidationStats> {
    let seeds: Vec<u64> = (0..n_runs).map(|i| trial_seed(base_seed, i)).collect();
    let records = collect(run_batch(&seeds, |s| run_trial(h, settings, s)))?;
    Ok(summarize(&records))
}

fn collect(outcomes: Vec<TrialOutcome>) -> Result<Vec<TrialRecord>> {
    outcomes.into_iter().map(|o| o.map_err(|(_, e)| e)).collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub ensemble_size: u64,
    /// Median upper bound over the seeds where it is defined.
    pub median_eps_high: Option<f64>,
    pub median_d_eps_high: Option<f64>,
    pub n_undefined: usize,
    pub records: Vec<TrialRecord>,
}

/// Median upper bound of `h` at each ensemble size, `seeds` records apiece.
/// Noise seeds depend on the ensemble size so the points are independent.
pub fn convergence_study(
    h: &HermitianOperator,
    ne_grid: &[u64],
    seeds: u64,
    settings: &TraceSettings,
    base_seed: u64,
) -> Result<Vec<ConvergencePoint>> {
    ne_grid
        .iter()
        .map(|&ne| {
            let s = settings.with_ensemble(ne);
            let seed_list: Vec<u64> = (0..seeds).map(|i| trial_seed(derive_seed(base_seed, ne), i)).collect();
            let records = collect(run_batch(&seed_list, |seed| run_trial(h, &s, seed)))?;
            Ok(convergence_point(ne, records))
        })
        .collect()
}

pub fn convergence_point(ensemble_size: u64, records: Vec<TrialRecord>) -> ConvergencePoint {
    let mut highs: Vec<f64> = records.iter().filter_map(|r| r.eps_high).collect();
    let mut errs: Vec<f64> = records.iter().filter_map(|r| r.d_eps_high).collect();
    ConvergencePoint {
        ensemble_size,
        n_undefined: records.len() - highs.len(),
        median_eps_high: median(&mut highs),
        median_d_eps_high: median(&mut errs),
        records,
    }
}

/// Ensemble-size search for the two leakage-detection criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyConfig {
    /// Seeds per ensemble size; a criterion holds when it holds for more than
    /// half of them.
    pub seeds: u64,
    pub ne_min: u64,
    pub ne_max: u64,
    /// Grid points per doubling of the ensemble size; 1 is a pure
    /// powers-of-two grid.
    pub steps_per_octave: u32,
    pub trace: TraceSettings,
    pub base_seed: u64,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self {
            seeds: 11,
            ne_min: 1 << 4,
            ne_max: 1 << 20,
            steps_per_octave: 1,
            trace: TraceSettings::default(),
            base_seed: 0,
        }
    }
}

impl EfficiencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 || self.ne_min == 0 || self.ne_max < self.ne_min || self.steps_per_octave == 0 {
            return Err(Error::InvalidPlan(format!(
                "efficiency search needs seeds > 0, 0 < ne_min <= ne_max and steps_per_octave > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub gamma: f64,
    pub eps_analytic: f64,
    /// Smallest ensemble size where the confinement criterion holds;
    /// `None` if it never does below the cap.
    pub ne_confinement: Option<u64>,
    /// Same for the third-peak criterion.
    pub ne_third_peak: Option<u64>,
    /// Frequency tested by the third-peak criterion, if any line is resolvable.
    pub target_omega: Option<f64>,
}

/// Coupling `gamma` at which `family(H_n, gamma)` has leakage `eps`.
pub fn gamma_for_leakage(levels: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::DegenerateTarget(eps));
    }
    let leak = |g: f64| family(Family::Leaky(levels), g).map(|h| exact_leakage(&h));
    let mut lo = 0.0;
    let mut hi = 1e-4;
    while leak(hi)? < eps {
        lo = hi;
        hi *= 2.0;
        if hi > 10.0 {
            return Err(Error::DegenerateTarget(eps));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if leak(mid)? < eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ensemble sizes searched: `ne_min * 2^(i / steps_per_octave)` up to `ne_max`.
pub fn ensemble_grid(cfg: &EfficiencyConfig) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let ne = (cfg.ne_min as f64 * 2f64.powf(i as f64 / cfg.steps_per_octave as f64)).round() as u64;
        if ne > cfg.ne_max {
            break;
        }
        if out.last() != Some(&ne) {
            out.push(ne);
        }
        i += 1;
    }
    out
}

/// Criterion verdicts per grid index, filled lazily.
struct Search<'a> {
    h: HermitianOperator,
    peaks: PeakSet,
    eps_low_analytic: f64,
    cfg: &'a EfficiencyConfig,
    grid: Vec<u64>,
    point_seed: u64,
    cache: Vec<Option<(bool, bool)>>,
    target: Option<f64>,
}

impl Search<'_> {
    /// (confinement, third peak) at grid index `i`, each decided by a
    /// majority over the seeds. Both tests read the same records.
    fn eval(&mut self, i: usize) -> Result<(bool, bool)> {
        if let Some(v) = self.cache[i] {
            return Ok(v);
        }
        let ne = self.grid[i];
        let settings = self.cfg.trace.with_ensemble(ne);
        let secondary = self.peaks.secondary_by_height();
        let (h, eps_low, base) = (&self.h, self.eps_low_analytic, derive_seed(self.point_seed, ne));
        let per_seed: Vec<Result<(bool, bool, Option<f64>)>> = (0..self.cfg.seeds)
            .into_par_iter()
            .map(|k| {
                let analysis = settings.analyze(h, trial_seed(base, k))?;
                let spec = analysis.spectrum.as_ref().expect("pipeline keeps the spectrum");
                let conf = significance_confinement(&analysis.estimate, eps_low);
                let target = secondary.iter().find(|t| t.height > 0.0 && is_resolvable(spec, t.frequency));
                let third = target.and_then(|t| third_peak_test_at(spec, t.frequency)).unwrap_or(false);
                Ok((conf, third, target.map(|t| t.frequency)))
            })
            .collect();
        let (mut conf, mut third) = (0u64, 0u64);
        for r in per_seed {
            let (c, t, w) = r?;
            conf += c as u64;
            third += t as u64;
            self.target = self.target.or(w);
        }
        let majority = |k: u64| 2 * k > self.cfg.seeds;
        let v = (majority(conf), majority(third));
        self.cache[i] = Some(v);
        Ok(v)
    }

    /// First index at or below the octave hit `i` where `pick` holds.
    fn refine(&mut self, hit: Option<usize>, pick: fn((bool, bool)) -> bool) -> Result<Option<usize>> {
        let Some(i) = hit else { return Ok(None) };
        let spo = self.cfg.steps_per_octave as usize;
        let start = if i >= spo { i + 1 - spo } else { i };
        for j in start..i {
            if pick(self.eval(j)?) {
                return Ok(Some(j));
            }
        }
        Ok(Some(i))
    }
}

/// Minimal ensemble sizes for both criteria at one coupling.
///
/// Whole octaves are scanned first; once a criterion holds, the grid points
/// inside the preceding octave are checked in ascending order.
pub fn efficiency_point(levels: usize, gamma: f64, cfg: &EfficiencyConfig, point_seed: u64) -> Result<EfficiencyPoint> {
    cfg.validate()?;
    let h = family(Family::Leaky(levels), gamma)?;
    let peaks = analytic_peaks(&h);
    let eps_low_analytic = analytic_bounds(&peaks).map_or(1.0 - peaks.primary_sum().sqrt(), |(lo, _)| lo);
    let eps_analytic = exact_leakage(&h);
    let grid = ensemble_grid(cfg);
    let cache = vec![None; grid.len()];
    let mut search = Search { h, peaks, eps_low_analytic, cfg, grid, point_seed, cache, target: None };

    let (mut first_conf, mut first_third) = (None, None);
    for i in (0..search.grid.len()).step_by(cfg.steps_per_octave as usize) {
        let (c, t) = search.eval(i)?;
        if c && first_conf.is_none() {
            first_conf = Some(i);
        }
        if t && first_third.is_none() {
            first_third = Some(i);
        }
        if first_conf.is_some() && first_third.is_some() {
            break;
        }
    }
    let conf = search.refine(first_conf, |v| v.0)?;
    let third = search.refine(first_third, |v| v.1)?;

    Ok(EfficiencyPoint {
        gamma,
        eps_analytic,
        ne_confinement: conf.map(|i| search.grid[i]),
        ne_third_peak: third.map(|i| search.grid[i]),
        target_omega: search.target,
    })
}

/// Efficiency points over a grid of couplings.
pub fn efficiency_curve(levels: usize, gammas: &[f64], cfg: &EfficiencyConfig) -> Result<Vec<EfficiencyPoint>> {
    if !(3..=10).contains(&levels) {
        return Err(Error::UnknownFamily(format!("H{levels}")));
    }
    gammas
        .iter()
        .enumerate()
        .map(|(i, &g)| efficiency_point(levels, g, cfg, derive_seed(cfg.base_seed, i as u64)))
        .collect()
}

/// `n` leakage values spaced geometrically over `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect(),
    }
}

/// Outcome of analysing a decohered record sized at the resolution limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherencePoint {
    pub zeta: f64,
    pub limit: ResolutionLimit,
    /// Linewidth fed to the resolution bound, `max(Ga, Gb)`.
    pub gamma: f64,
    pub num_samples: usize,
    pub kept: usize,
    pub eps_high: Option<f64>,
    pub d_eps_high: Option<f64>,
    /// `eps_high <= zeta`.
    pub within_target: bool,
}

/// Simulates `cfg` for the longest record the bound allows for target
/// `zeta`, then runs the ordinary trace pipeline on it.
pub fn decoherence_check(cfg: &DecoherenceConfig, zeta: f64, samples_per_period: usize) -> Result<DecoherencePoint> {
    let gamma = cfg.gamma_alpha().max(cfg.gamma_beta());
    let limit = max_resolution(gamma, zeta)?;
    if samples_per_period < 3 {
        return Err(Error::InvalidPlan("need at least 3 samples per period".into()));
    }
    let dt = 2.0 * std::f64::consts::PI / cfg.gap / samples_per_period as f64;
    let num_samples = (limit.t_ob / dt).floor() as usize;
    let times: Vec<f64> = (0..num_samples).map(|k| k as f64 * dt).collect();
    let trace = evolve_bloch(cfg, &times)?;
    let analysis = analyze_trace_with_guard(&trace, DEFAULT_GUARD)?;
    let est = analysis.estimate;
    Ok(DecoherencePoint {
        zeta,
        limit,
        gamma,
        num_samples,
        kept: analysis.kept,
        eps_high: est.eps_high,
        d_eps_high: est.d_eps_high,
        within_target: est.eps_high.is_some_and(|e| e <= zeta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[0.0, 0.1, 0.5, 1.0, 1.0], 4);
        assert_eq!(h.counts, vec![2, 0, 1, 2]);
        assert_eq!(h.edges.len(), 5);
        assert_eq!(histogram(&[], 3).counts, vec![0, 0, 0]);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn grid_shapes() {
        let cfg = EfficiencyConfig { ne_min: 16, ne_max: 256, steps_per_octave: 1, ..Default::default() };
        assert_eq!(ensemble_grid(&cfg), vec![16, 32, 64, 128, 256]);
        let fine = EfficiencyConfig { steps_per_octave: 2, ..cfg.clone() };
        assert_eq!(ensemble_grid(&fine), vec![16, 23, 32, 45, 64, 91, 128, 181, 256]);
        let g = geometric_grid(1e-3, 1e-2, 3);
        assert!((g[1] - 10f64.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn coupling_inversion() {
        for (n, eps) in [(3, 1e-3), (6, 5e-3), (10, 1e-2)] {
            let g = gamma_for_leakage(n, eps).unwrap();
            let got = exact_leakage(&family(Family::Leaky(n), g).unwrap());
            assert!((got - eps).abs() < 1e-10 * eps, "H{n}: {got}");
        }
        assert!(gamma_for_leakage(3, 0.0).is_err());
    }

    #[test]
    fn noiseless_trials_are_exact() {
        // sidelobes of unresolved secondary lines are the only error left
        let settings = TraceSettings::default().with_ensemble(0);
        for i in 0..100 {
            let r = validation_trial(&settings, trial_seed(5, i)).unwrap();
            let d = r.distance().unwrap();
            assert!(d < 1e-4 && d <= 0.1 * r.eps_analytic.max(1e-12), "{r:?}");
        }
    }

    #[test]
    fn summary_ratio() {
        let rec = |eh: Option<f64>, dd: Option<f64>| TrialRecord {
            seed: 0,
            n_levels: 3,
            eps_analytic: 1e-3,
            eps_low: 0.0,
            eps_high: eh,
            d_eps_low: 0.0,
            d_eps_high: dd,
            flags: String::new(),
        };
        let s = summarize(&[rec(Some(1.1e-3), Some(1e-4)), rec(Some(2e-3), Some(1e-4)), rec(None, None)]);
        assert_eq!(s.n_undefined, 1);
        assert!((s.ratio - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.distances.len(), 2);
    }
}
