// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Qubit subspace leakage from Rabi-oscillation spectra.
///
/// Data goes to files under --out-dir; diagnostics go to standard error.
#[derive(Debug, Parser)]
#[command(name = "qconfine", version)]
pub struct Cli {
    /// Worker threads for campaigns (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a Rabi trace.
    Simulate(SimulateArgs),
    /// Bound the leakage of a recorded trace.
    Estimate(EstimateArgs),
    /// Run a multi-trial study.
    #[command(subcommand)]
    Campaign(CampaignCommand),
    /// Decohered qubit trace, spectrum and resolution limit.
    Decoherence(DecoherenceArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct HamiltonianSource {
    /// Named Hamiltonian: Hm, Hn, Ha, Hb or H3..H10.
    #[arg(long)]
    pub family: Option<String>,
    /// Hamiltonian JSON file {"dim", "real", "imag"}.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: HamiltonianSource,
    /// Coupling for the H3..H10 families.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, env = "QCONFINE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Repetitions per time point; 0 writes the noiseless trace.
    #[arg(long, default_value_t = 1024)]
    pub ne: u64,
    /// Sample spacing (default: Rabi period / 20).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Observation time in Rabi periods.
    #[arg(long, default_value_t = 30.0)]
    pub cycles: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Trace file format.
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Trace file (CSV `t,p,ne,seed` or JSON).
    pub trace: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Channels on each side of the primary line kept out of the noise window.
    #[arg(long, default_value_t = 1)]
    pub guard: usize,
}

#[derive(Debug, Subcommand)]
pub enum CampaignCommand {
    /// Random-ensemble validation, or a distance study of one Hamiltonian.
    Validate(CampaignArgs),
    /// Ensemble sizes needed by the confinement and third-peak criteria.
    Efficiency(CampaignArgs),
    /// Median upper bound against ensemble size.
    Convergence(CampaignArgs),
    /// Pipeline on decohered records sized at the resolution limit.
    Decoherence(CampaignArgs),
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Campaign JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, env = "QCONFINE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Trials (validate).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Seeds per point (efficiency, convergence).
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Ensemble size (validate).
    #[arg(long)]
    pub ne: Option<u64>,
    /// Ensemble sizes, `16,64,256` or `2^4..2^14` (convergence).
    #[arg(long)]
    pub ne_grid: Option<String>,
    #[arg(long)]
    pub samples_per_period: Option<usize>,
    #[arg(long)]
    pub cycles: Option<f64>,
    /// Efficiency grid points per doubling of the ensemble size.
    #[arg(long)]
    pub steps_per_octave: Option<u32>,
    /// Comma-separated leakage targets (decoherence).
    #[arg(long)]
    pub zeta: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecoherenceArgs {
    /// JSON {theta, d, gx, gy, gz}.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    pub cycles: f64,
    #[arg(long, default_value_t = 20)]
    pub samples_per_period: usize,
    /// Leakage target for the resolution limit.
    #[arg(long, default_value_t = 1e-3)]
    pub zeta: f64,
}
