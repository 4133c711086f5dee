// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use qconfine::campaign::{
    convergence_point, efficiency_point, decoherence_check, run_batch, run_trial, summarize, trial_seed,
    validation_trial, EfficiencyPoint, TrialRecord, ValidationStats,
};
use qconfine::decoherence::{
    analytic_spectrum, evolve_bloch, lorentzian_peaks, max_resolution, DecoherenceConfig, LorentzianPeaks,
    ResolutionLimit,
};
use qconfine::estimate::analyze_trace_with_guard;
use qconfine::formats::{
    append_trials, load_decoherence_config, load_hamiltonian, load_trace, read_trials_if_present, save_hamiltonian,
    save_spectrum, save_trace, write_json, write_table, EstimateReport, ANGULAR,
};
use qconfine::sim::{derive_seed, rabi_period, DEFAULT_SAMPLES_PER_PERIOD};
use qconfine::{
    analytic_bounds, analytic_peaks, exact_leakage, family, ideal_trace, sample_trace, Error, Family,
    RabiTrace, Result, SamplingPlan,
};

use super::args::{CampaignArgs, CampaignCommand, DecoherenceArgs, EstimateArgs, SimulateArgs};
use super::config::{self, ConvergencePlan, DecoherencePlan, EfficiencyPlan, ValidatePlan};
use super::manifest::{Recorder, RunManifest, MANIFEST};

/// Failure of a command: a library error, or trials that failed while the
/// rest of the campaign was written out.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Workers(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

pub type Outcome = std::result::Result<(), Failure>;

/// Trials are appended to disk in chunks of this size so an interrupted run
/// keeps what it finished.
const CHUNK: usize = 256;

#[derive(Serialize)]
struct SimulateInputs<'a> {
    family: Option<String>,
    gamma: f64,
    hamiltonian: Option<&'a Path>,
    plan: &'a SamplingPlan,
}

pub fn simulate(a: &SimulateArgs) -> Outcome {
    let mut rec = Recorder::new("simulate", &a.out_dir)?;
    let (h, family_name) = match (&a.source.family, &a.source.hamiltonian) {
        (Some(name), _) => {
            let f: Family = name.parse()?;
            (family(f, a.gamma)?, Some(f.to_string()))
        }
        (None, Some(path)) => {
            rec.input(path);
            (load_hamiltonian(path)?, None)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let period = rabi_period(&h)
        .ok_or_else(|| Error::InvalidPlan("Hamiltonian has no oscillating transition to set the period".into()))?;
    if !(a.cycles.is_finite() && a.cycles > 0.0) {
        return Err(Error::Malformed { field: "cycles".into(), reason: format!("must be positive, got {}", a.cycles) }.into());
    }
    let plan = match a.dt {
        Some(dt) => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Malformed { field: "dt".into(), reason: format!("must be positive, got {dt}") }.into());
            }
            let plan = SamplingPlan {
                dt,
                num_samples: (a.cycles * period / dt).round() as usize,
                ensemble_size: a.ne,
                seed: a.seed,
                rabi_period: Some(period),
            };
            plan.validate()?;
            plan
        }
        None => SamplingPlan::for_period(period, DEFAULT_SAMPLES_PER_PERIOD, a.cycles, a.ne, a.seed)?,
    };
    let trace = if a.ne == 0 { ideal_trace(&h, &plan)? } else { sample_trace(&h, &plan)? };

    rec.seed(a.seed);
    rec.plan(&SimulateInputs {
        family: family_name,
        gamma: a.gamma,
        hamiltonian: a.source.hamiltonian.as_deref(),
        plan: &plan,
    });
    let h_path = rec.path("hamiltonian.json");
    save_hamiltonian(&h_path, &h)?;
    rec.output(&h_path);
    let trace_path = rec.path(&format!("trace.{}", a.format));
    save_trace(&trace_path, &trace)?;
    rec.output(&trace_path);
    rec.finish()?;
    Ok(())
}

pub fn estimate(a: &EstimateArgs) -> Outcome {
    let mut rec = Recorder::new("estimate", &a.out_dir)?;
    rec.input(&a.trace);
    let trace = load_trace(&a.trace)?;
    let analysis = analyze_trace_with_guard(&trace, a.guard)?;
    rec.seed(trace.seed);
    rec.plan(&serde_json::json!({ "guard": a.guard }));

    let est_path = rec.path("estimate.json");
    write_json(&est_path, &EstimateReport::new(&analysis, trace.len()))?;
    rec.output(&est_path);
    if let Some(spec) = &analysis.spectrum {
        for p in save_spectrum(&a.out_dir, "spectrum", spec)? {
            rec.output(&p);
        }
    }
    rec.finish()?;
    Ok(())
}

/// Refuses to mix results from two different plans in one directory.
fn check_resume<T: Serialize>(out_dir: &Path, command: &str, plan: &T) -> Result<()> {
    let path = out_dir.join(MANIFEST);
    if !path.exists() {
        return Ok(());
    }
    let old: RunManifest = qconfine::formats::read_json(&path)?;
    let new = serde_json::to_value(plan).map_err(|e| Error::Io(e.to_string()))?;
    if old.command != command || old.plan != new {
        return Err(Error::Malformed {
            field: "out_dir".into(),
            reason: format!("{} holds a different run ({}); use a fresh directory", out_dir.display(), old.command),
        });
    }
    Ok(())
}

struct Batch {
    records: Vec<TrialRecord>,
    failed: usize,
    resumed: usize,
}

/// Runs every seed not already in `path`, appending as it goes, then
/// rewrites the file in seed-list order.
fn run_trials<F>(path: &Path, seeds: &[u64], trial: F) -> Result<Batch>
where
    F: Fn(u64) -> Result<TrialRecord> + Sync,
{
    let wanted: HashSet<u64> = seeds.iter().copied().collect();
    let mut done: HashMap<u64, TrialRecord> =
        read_trials_if_present(path)?.into_iter().filter(|r| wanted.contains(&r.seed)).map(|r| (r.seed, r)).collect();
    let resumed = done.len();
    let todo: Vec<u64> = seeds.iter().copied().filter(|s| !done.contains_key(s)).collect();
    let mut failed = 0;
    for chunk in todo.chunks(CHUNK) {
        let mut ok = Vec::with_capacity(chunk.len());
        for outcome in run_batch(chunk, &trial) {
            match outcome {
                Ok(r) => ok.push(r),
                Err((seed, e)) => {
                    eprintln!("qconfine: trial seed {seed} failed: {e}");
                    failed += 1;
                }
            }
        }
        append_trials(path, &ok)?;
        done.extend(ok.into_iter().map(|r| (r.seed, r)));
    }
    let records: Vec<TrialRecord> = seeds.iter().filter_map(|s| done.remove(s)).collect();
    let tmp = path.with_extension("csv.tmp");
    let _ = std::fs::remove_file(&tmp);
    append_trials(&tmp, &records)?;
    std::fs::rename(&tmp, path)?;
    Ok(Batch { records, failed, resumed })
}

fn workers_result(rec: Recorder, failed: usize) -> Outcome {
    rec.finish()?;
    if failed > 0 {
        return Err(Failure::Workers(failed));
    }
    Ok(())
}

pub fn campaign(cmd: &CampaignCommand) -> Outcome {
    match cmd {
        CampaignCommand::Validate(a) => validate(a),
        CampaignCommand::Efficiency(a) => efficiency(a),
        CampaignCommand::Convergence(a) => convergence(a),
        CampaignCommand::Decoherence(a) => decoherence_campaign(a),
    }
}

fn start(command: &str, a: &CampaignArgs) -> Result<Recorder> {
    let mut rec = Recorder::new(command, &a.out_dir)?;
    if let Some(p) = &a.config {
        rec.input(p);
    }
    Ok(rec)
}

#[derive(Serialize)]
struct ValidateSummary<'a> {
    #[serde(flatten)]
    stats: &'a ValidationStats,
    n_failed: usize,
    /// Exact leakage of the fixed Hamiltonian, for distance studies.
    eps_exact: Option<f64>,
    uncertainty_convention: &'static str,
}

const SIGMA: &str = "d_eps_* are one-sigma uncertainties; a trial succeeds when |eps_high - eps_analytic| <= 3 d_eps_high";

fn validate(a: &CampaignArgs) -> Outcome {
    let plan = ValidatePlan::resolve(&config::merge(a)?)?;
    check_resume(&a.out_dir, "campaign validate", &plan)?;
    let mut rec = start("campaign validate", a)?;
    rec.seed(plan.seed);
    rec.plan(&plan);

    let seeds: Vec<u64> = (0..plan.trials).map(|i| trial_seed(plan.seed, i)).collect();
    let trials_path = rec.path("trials.csv");
    let (batch, eps_exact) = match plan.family {
        Some(f) => {
            let h = family(f, plan.gamma)?;
            (run_trials(&trials_path, &seeds, |s| run_trial(&h, &plan.trace, s))?, Some(exact_leakage(&h)))
        }
        None => (run_trials(&trials_path, &seeds, |s| validation_trial(&plan.trace, s))?, None),
    };
    rec.output(&trials_path);
    rec.resumed(batch.resumed);

    let stats = summarize(&batch.records);
    eprintln!(
        "qconfine: {} trials, R = {:.4}, mean d_eps_high = {:.3e}",
        stats.n_trials, stats.ratio, stats.mean_error
    );
    let summary_path = rec.path("summary.json");
    write_json(
        &summary_path,
        &ValidateSummary { stats: &stats, n_failed: batch.failed, eps_exact, uncertainty_convention: SIGMA },
    )?;
    rec.output(&summary_path);
    workers_result(rec, batch.failed)
}

#[derive(Serialize)]
struct ConvergenceRow {
    ne: u64,
    median_eps_high: Option<f64>,
    median_d_eps_high: Option<f64>,
    n_undefined: usize,
    n_trials: usize,
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    family: Family,
    eps_exact: f64,
    eps_high_analytic: Option<f64>,
    points: &'a [ConvergenceRow],
    n_failed: usize,
    uncertainty_convention: &'static str,
}

fn convergence(a: &CampaignArgs) -> Outcome {
    let plan = ConvergencePlan::resolve(&config::merge(a)?)?;
    check_resume(&a.out_dir, "campaign convergence", &plan)?;
    let mut rec = start("campaign convergence", a)?;
    rec.seed(plan.seed);
    rec.plan(&plan);
    let h = family(plan.family, plan.gamma)?;
    std::fs::create_dir_all(rec.path("trials"))?;

    let (mut rows, mut failed, mut resumed) = (Vec::new(), 0, 0);
    for &ne in &plan.ne_grid {
        let settings = plan.trace.with_ensemble(ne);
        let base = derive_seed(plan.seed, ne);
        let seeds: Vec<u64> = (0..plan.seeds).map(|i| trial_seed(base, i)).collect();
        let path = rec.path(&format!("trials/ne_{ne}.csv"));
        let batch = run_trials(&path, &seeds, |s| run_trial(&h, &settings, s))?;
        rec.output(&path);
        failed += batch.failed;
        resumed += batch.resumed;
        let p = convergence_point(ne, batch.records);
        eprintln!("qconfine: ne = {ne}: median eps_high = {:?}", p.median_eps_high);
        rows.push(ConvergenceRow {
            ne,
            median_eps_high: p.median_eps_high,
            median_d_eps_high: p.median_d_eps_high,
            n_undefined: p.n_undefined,
            n_trials: p.records.len(),
        });
    }
    rec.resumed(resumed);

    let curve_path = rec.path("curve.csv");
    let mut w = BufWriter::new(File::create(&curve_path)?);
    write_table(
        &mut w,
        &["ne", "median_eps_high", "median_d_eps_high", "n_undefined", "n_trials"],
        rows.iter().map(|r| (r.ne, r.median_eps_high, r.median_d_eps_high, r.n_undefined, r.n_trials)),
    )?;
    w.flush()?;
    rec.output(&curve_path);

    let summary_path = rec.path("summary.json");
    write_json(
        &summary_path,
        &ConvergenceSummary {
            family: plan.family,
            eps_exact: exact_leakage(&h),
            eps_high_analytic: analytic_bounds(&analytic_peaks(&h)).ok().map(|(_, hi)| hi),
            points: &rows,
            n_failed: failed,
            uncertainty_convention: SIGMA,
        },
    )?;
    rec.output(&summary_path);
    workers_result(rec, failed)
}

const CURVE_HEADER: [&str; 5] = ["gamma", "eps_analytic", "ne_confinement", "ne_third_peak", "target_omega"];

fn write_curve(path: &Path, points: &[EfficiencyPoint], fresh: bool) -> Result<()> {
    let file = if fresh {
        File::create(path)?
    } else {
        std::fs::OpenOptions::new().create(true).append(true).open(path)?
    };
    let empty = file.metadata()?.len() == 0;
    let mut w = BufWriter::new(file);
    let rows = points.iter().map(|p| (p.gamma, p.eps_analytic, p.ne_confinement, p.ne_third_peak, p.target_omega));
    if empty {
        write_table(&mut w, &CURVE_HEADER, rows)?;
    } else {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(&mut w);
        for r in rows {
            out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        out.flush()?;
    }
    w.flush()?;
    Ok(())
}

fn read_curve(path: &Path) -> Result<Vec<EfficiencyPoint>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut input = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    input
        .deserialize::<EfficiencyPoint>()
        .map(|r| {
            r.map_err(|e| Error::Malformed { field: path.display().to_string(), reason: e.to_string() })
        })
        .collect()
}

#[derive(Serialize)]
struct EfficiencySummary<'a> {
    family: String,
    points: &'a [EfficiencyPoint],
    n_failed: usize,
    frequency_units: &'static str,
    criteria: &'static str,
}

fn efficiency(a: &CampaignArgs) -> Outcome {
    let plan = EfficiencyPlan::resolve(&config::merge(a)?)?;
    check_resume(&a.out_dir, "campaign efficiency", &plan)?;
    let mut rec = start("campaign efficiency", a)?;
    rec.seed(plan.config.base_seed);
    rec.plan(&plan);

    let curve_path = rec.path("curve.csv");
    let mut done: HashMap<u64, EfficiencyPoint> =
        read_curve(&curve_path)?.into_iter().map(|p| (p.gamma.to_bits(), p)).collect();
    let resumed = done.len();
    let mut failed = 0;
    for (i, &g) in plan.gammas.iter().enumerate() {
        if done.contains_key(&g.to_bits()) {
            continue;
        }
        match efficiency_point(plan.levels, g, &plan.config, derive_seed(plan.config.base_seed, i as u64)) {
            Ok(p) => {
                eprintln!(
                    "qconfine: gamma = {g:.4e}: confinement {:?}, third peak {:?}",
                    p.ne_confinement, p.ne_third_peak
                );
                write_curve(&curve_path, std::slice::from_ref(&p), false)?;
                done.insert(g.to_bits(), p);
            }
            Err(e) => {
                eprintln!("qconfine: gamma = {g:.4e} failed: {e}");
                failed += 1;
            }
        }
    }
    let points: Vec<EfficiencyPoint> = plan.gammas.iter().filter_map(|g| done.remove(&g.to_bits())).collect();
    write_curve(&curve_path, &points, true)?;
    rec.output(&curve_path);
    rec.resumed(resumed);

    let summary_path = rec.path("summary.json");
    write_json(
        &summary_path,
        &EfficiencySummary {
            family: format!("H{}", plan.levels),
            points: &points,
            n_failed: failed,
            frequency_units: ANGULAR,
            criteria: "ne_* is the smallest ensemble size where the criterion holds for a majority of seeds",
        },
    )?;
    rec.output(&summary_path);
    workers_result(rec, failed)
}

fn decoherence_campaign(a: &CampaignArgs) -> Outcome {
    let plan = DecoherencePlan::resolve(&config::merge(a)?)?;
    let mut rec = start("campaign decoherence", a)?;
    rec.plan(&plan);

    let mut points = Vec::new();
    let mut failed = 0;
    for &z in &plan.zeta {
        match decoherence_check(&plan.system, z, plan.samples_per_period) {
            Ok(p) => points.push(p),
            Err(e) => {
                eprintln!("qconfine: zeta = {z} failed: {e}");
                failed += 1;
            }
        }
    }
    let curve_path = rec.path("curve.csv");
    let mut w = BufWriter::new(File::create(&curve_path)?);
    write_table(
        &mut w,
        &["zeta", "gamma", "delta_omega", "delta_f", "t_ob", "num_samples", "kept", "eps_high", "d_eps_high", "within_target"],
        points.iter().map(|p| {
            (
                p.zeta,
                p.gamma,
                p.limit.delta_omega,
                p.limit.delta_f,
                p.limit.t_ob,
                p.num_samples,
                p.kept,
                p.eps_high,
                p.d_eps_high,
                p.within_target,
            )
        }),
    )?;
    w.flush()?;
    rec.output(&curve_path);

    let summary_path = rec.path("summary.json");
    write_json(
        &summary_path,
        &serde_json::json!({
            "system": plan.system,
            "points": points,
            "n_failed": failed,
            "frequency_units": "delta_omega angular, delta_f ordinary (delta_omega / 2 pi)",
        }),
    )?;
    rec.output(&summary_path);
    workers_result(rec, failed)
}

#[derive(Serialize)]
struct DecoherenceReport {
    config: DecoherenceConfig,
    gamma_alpha: f64,
    gamma_beta: f64,
    /// Absent when the gap is not well above the rates.
    lorentzian: Option<LorentzianPeaks>,
    zeta: f64,
    /// Absent when both linewidths vanish.
    resolution: Option<ResolutionLimit>,
    frequency_units: &'static str,
}

pub fn decoherence(a: &DecoherenceArgs) -> Outcome {
    let mut rec = Recorder::new("decoherence", &a.out_dir)?;
    rec.input(&a.config);
    let cfg = load_decoherence_config(&a.config)?;
    if a.samples_per_period < 3 {
        return Err(Error::InvalidPlan("need at least 3 samples per period".into()).into());
    }
    if !(a.cycles.is_finite() && a.cycles > 0.0) {
        return Err(Error::Malformed { field: "cycles".into(), reason: format!("must be positive, got {}", a.cycles) }.into());
    }
    let dt = 2.0 * PI / cfg.gap / a.samples_per_period as f64;
    let n = (a.cycles * a.samples_per_period as f64).round() as usize;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    rec.plan(&serde_json::json!({
        "dt": dt,
        "num_samples": n,
        "cycles": a.cycles,
        "samples_per_period": a.samples_per_period,
        "zeta": a.zeta,
    }));
    let trace: RabiTrace = evolve_bloch(&cfg, &times)?;
    let trace_path = rec.path("trace.csv");
    save_trace(&trace_path, &trace)?;
    rec.output(&trace_path);

    let analysis = analyze_trace_with_guard(&trace, qconfine::spectral::DEFAULT_GUARD)?;
    let est_path = rec.path("estimate.json");
    write_json(&est_path, &EstimateReport::new(&analysis, trace.len()))?;
    rec.output(&est_path);
    let spec = analysis.spectrum.as_ref().expect("pipeline keeps the spectrum");
    for p in save_spectrum(&a.out_dir, "spectrum", spec)? {
        rec.output(&p);
    }

    let lorentzian = match lorentzian_peaks(&cfg) {
        Ok(l) => Some(l),
        Err(e) => {
            eprintln!("qconfine: skipping Lorentzian lines: {e}");
            None
        }
    };
    let omegas: Vec<f64> = spec.freqs.iter().copied().filter(|&w| w > 0.0).collect();
    let resolvent = analytic_spectrum(&cfg, &omegas)?;
    let analytic_path = rec.path("analytic.csv");
    let mut w = BufWriter::new(File::create(&analytic_path)?);
    write_table(
        &mut w,
        &["omega", "re", "im", "lorentzian"],
        omegas
            .iter()
            .zip(&resolvent)
            .map(|(&om, f)| (om, f.re, f.im, lorentzian.map(|l| l.dc_line(om) + l.rabi_line(om)))),
    )?;
    w.flush()?;
    rec.output(&analytic_path);

    let gamma = cfg.gamma_alpha().max(cfg.gamma_beta());
    let resolution = if gamma > 0.0 { Some(max_resolution(gamma, a.zeta)?) } else { None };
    let report_path = rec.path("decoherence.json");
    write_json(
        &report_path,
        &DecoherenceReport {
            gamma_alpha: cfg.gamma_alpha(),
            gamma_beta: cfg.gamma_beta(),
            config: cfg,
            lorentzian,
            zeta: a.zeta,
            resolution,
            frequency_units: "angular, except resolution.delta_f (ordinary)",
        },
    )?;
    rec.output(&report_path);
    rec.finish()?;
    Ok(())
}
