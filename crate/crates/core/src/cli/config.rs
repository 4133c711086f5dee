// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use qconfine::campaign::{geometric_grid, TraceSettings};
use qconfine::decoherence::DecoherenceConfig;
use qconfine::formats::read_json;
use qconfine::{Error, Family, Result};

use super::args::CampaignArgs;

/// Campaign JSON as written by the user. Every field is optional; flags
/// override it and the campaign kind supplies the rest.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignFile {
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub gamma: Option<f64>,
    pub trials: Option<u64>,
    pub seeds: Option<u64>,
    pub ne: Option<u64>,
    pub ne_grid: Option<NeGrid>,
    pub samples_per_period: Option<usize>,
    pub cycles: Option<f64>,
    pub guard: Option<usize>,
    pub steps_per_octave: Option<u32>,
    pub ne_min: Option<u64>,
    pub ne_max: Option<u64>,
    /// Couplings for the efficiency curve.
    pub gammas: Option<Vec<f64>>,
    /// Target leakages for the efficiency curve, matched by coupling.
    pub eps: Option<Vec<f64>>,
    pub zeta: Option<Vec<f64>>,
    /// Qubit and rates for the decoherence campaign.
    pub system: Option<DecoherenceConfig>,
}

/// Ensemble sizes, either listed or as a range spec string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NeGrid {
    List(Vec<u64>),
    Spec(String),
}

impl NeGrid {
    pub fn values(&self) -> Result<Vec<u64>> {
        match self {
            NeGrid::List(v) => check_grid(v.clone()),
            NeGrid::Spec(s) => parse_ne_grid(s),
        }
    }
}

fn grid_error(reason: impl Into<String>) -> Error {
    Error::Malformed { field: "ne_grid".into(), reason: reason.into() }
}

fn check_grid(v: Vec<u64>) -> Result<Vec<u64>> {
    if v.is_empty() || v.contains(&0) {
        return Err(grid_error("needs at least one positive ensemble size"));
    }
    Ok(v)
}

fn parse_power(s: &str) -> Result<(u64, u32)> {
    let (b, e) = s.trim().split_once('^').ok_or_else(|| grid_error(format!("expected base^exp, got `{s}`")))?;
    let b = b.trim().parse::<u64>().map_err(|_| grid_error(format!("bad base in `{s}`")))?;
    let e = e.trim().parse::<u32>().map_err(|_| grid_error(format!("bad exponent in `{s}`")))?;
    Ok((b, e))
}

/// `16,64,256` or `2^4..2^14` (every power in between).
pub fn parse_ne_grid(s: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (b0, e0) = parse_power(lo)?;
        let (b1, e1) = parse_power(hi)?;
        if b0 != b1 || b0 < 2 || e1 < e0 {
            return Err(grid_error(format!("range `{s}` needs one base >= 2 and ascending exponents")));
        }
        return (e0..=e1)
            .map(|e| b0.checked_pow(e).ok_or_else(|| grid_error(format!("{b0}^{e} overflows"))))
            .collect::<Result<Vec<_>>>()
            .and_then(check_grid);
    }
    let v = s
        .split(',')
        .map(|p| {
            let p = p.trim();
            if p.contains('^') {
                let (b, e) = parse_power(p)?;
                b.checked_pow(e).ok_or_else(|| grid_error(format!("{p} overflows")))
            } else {
                p.parse::<u64>().map_err(|_| grid_error(format!("bad entry `{p}`")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    check_grid(v)
}

pub fn parse_list(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Malformed { field: field.into(), reason: format!("bad number `{}`", p.trim()) })
        })
        .collect()
}

/// Loads the config file (if any) and lays the flags over it.
pub fn merge(args: &CampaignArgs) -> Result<CampaignFile> {
    let mut c: CampaignFile = match &args.config {
        Some(p) => read_json(p)?,
        None => CampaignFile::default(),
    };
    macro_rules! over {
        ($($f:ident),*) => { $( if args.$f.is_some() { c.$f = args.$f.clone(); } )* };
    }
    over!(seed, family, gamma, trials, seeds, ne, samples_per_period, cycles, steps_per_octave);
    if let Some(s) = &args.ne_grid {
        c.ne_grid = Some(NeGrid::Spec(s.clone()));
    }
    if let Some(s) = &args.zeta {
        c.zeta = Some(parse_list("zeta", s)?);
    }
    Ok(c)
}

impl CampaignFile {
    pub fn trace(&self, ensemble_size: u64) -> TraceSettings {
        let d = TraceSettings::default();
        TraceSettings {
            ensemble_size: self.ne.unwrap_or(ensemble_size),
            samples_per_period: self.samples_per_period.unwrap_or(d.samples_per_period),
            cycles: self.cycles.unwrap_or(d.cycles),
            guard: self.guard.unwrap_or(d.guard),
        }
    }

    pub fn family(&self) -> Result<Option<Family>> {
        self.family.as_deref().map(str::parse).transpose()
    }
}

/// Fully resolved validation run; goes into the manifest verbatim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidatePlan {
    /// `None` draws a fresh random leaky Hamiltonian per trial.
    pub family: Option<Family>,
    pub gamma: f64,
    pub trials: u64,
    pub seed: u64,
    pub trace: TraceSettings,
}

pub const DEFAULT_VALIDATION_TRIALS: u64 = 500;

impl ValidatePlan {
    pub fn resolve(c: &CampaignFile) -> Result<Self> {
        Ok(Self {
            family: c.family()?,
            gamma: c.gamma.unwrap_or(0.0),
            trials: c.trials.unwrap_or(DEFAULT_VALIDATION_TRIALS),
            seed: c.seed.unwrap_or(0),
            trace: c.trace(qconfine::sim::DEFAULT_ENSEMBLE_SIZE),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePlan {
    pub family: Family,
    pub gamma: f64,
    pub ne_grid: Vec<u64>,
    pub seeds: u64,
    pub seed: u64,
    pub trace: TraceSettings,
}

pub const DEFAULT_SEEDS: u64 = 11;

impl ConvergencePlan {
    pub fn resolve(c: &CampaignFile) -> Result<Self> {
        let ne_grid = match &c.ne_grid {
            Some(g) => g.values()?,
            None => parse_ne_grid("2^4..2^14")?,
        };
        Ok(Self {
            family: c.family()?.unwrap_or(Family::Hb),
            gamma: c.gamma.unwrap_or(0.0),
            ne_grid,
            seeds: c.seeds.unwrap_or(DEFAULT_SEEDS),
            seed: c.seed.unwrap_or(0),
            trace: c.trace(qconfine::sim::DEFAULT_ENSEMBLE_SIZE),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPlan {
    pub levels: usize,
    /// Target leakages the couplings were matched to, when given that way.
    pub eps: Option<Vec<f64>>,
    pub gammas: Vec<f64>,
    pub config: qconfine::campaign::EfficiencyConfig,
}

impl EfficiencyPlan {
    pub fn resolve(c: &CampaignFile) -> Result<Self> {
        let levels = match c.family()?.unwrap_or(Family::Leaky(3)) {
            Family::Leaky(n) => n,
            other => {
                return Err(Error::Malformed {
                    field: "family".into(),
                    reason: format!("efficiency needs one of H3..H10, got {other}"),
                })
            }
        };
        let (eps, gammas) = match (&c.gammas, &c.eps) {
            (Some(_), Some(_)) => {
                return Err(Error::Malformed { field: "gammas".into(), reason: "give gammas or eps, not both".into() })
            }
            (Some(g), None) => (None, g.clone()),
            (None, None) if c.gamma.is_some() => (None, c.gamma.into_iter().collect()),
            (None, e) => {
                let eps = e.clone().unwrap_or_else(|| geometric_grid(1e-3, 1e-2, 6));
                let g = eps
                    .iter()
                    .map(|&e| qconfine::campaign::gamma_for_leakage(levels, e))
                    .collect::<Result<Vec<_>>>()?;
                (Some(eps), g)
            }
        };
        let d = qconfine::campaign::EfficiencyConfig::default();
        let config = qconfine::campaign::EfficiencyConfig {
            seeds: c.seeds.unwrap_or(d.seeds),
            ne_min: c.ne_min.unwrap_or(d.ne_min),
            ne_max: c.ne_max.unwrap_or(d.ne_max),
            steps_per_octave: c.steps_per_octave.unwrap_or(d.steps_per_octave),
            trace: c.trace(d.trace.ensemble_size),
            base_seed: c.seed.unwrap_or(0),
        };
        config.validate()?;
        Ok(Self { levels, eps, gammas, config })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherencePlan {
    pub system: DecoherenceConfig,
    pub zeta: Vec<f64>,
    pub samples_per_period: usize,
}

impl DecoherencePlan {
    pub fn resolve(c: &CampaignFile) -> Result<Self> {
        let system = c.system.clone().ok_or_else(|| Error::Malformed {
            field: "system".into(),
            reason: "decoherence campaign needs {theta, d, gx, gy, gz}".into(),
        })?;
        system.validate()?;
        Ok(Self {
            system,
            zeta: c.zeta.clone().unwrap_or_else(|| vec![1e-3]),
            samples_per_period: c.samples_per_period.unwrap_or(qconfine::sim::DEFAULT_SAMPLES_PER_PERIOD),
        })
    }
}
