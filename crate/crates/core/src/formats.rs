// SPDX-License-Identifier: Apache-2.0

//! On-disk formats.
//!
//! | data | format |
//! |---|---|
//! | Hamiltonian | JSON `{"dim": n, "real": [[..]], "imag": [[..]]}`, `imag` optional |
//! | trace | CSV `t,p,ne,seed` or JSON mirroring [`RabiTrace`] |
//! | spectrum | CSV `omega,amp` plus a JSON summary |
//! | campaign trials | CSV, one [`TrialRecord`] per row |
//! | decoherence config | JSON `{theta, d, gx, gy, gz}` |
//!
//! Frequencies are angular throughout; files that carry one say so in a
//! `frequency_units` field.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::campaign::TrialRecord;
use crate::decoherence::DecoherenceConfig;
use crate::error::{Error, Result};
use crate::estimate::Analysis;
use crate::linalg::{CMatrix, HermitianOperator};
use crate::sim::RabiTrace;
use crate::spectral::Spectrum;

pub const ANGULAR: &str = "angular (rad per time unit)";

fn malformed(field: impl Into<String>, reason: impl ToString) -> Error {
    Error::Malformed { field: field.into(), reason: reason.to_string() }
}

fn json_error(e: serde_json::Error) -> Error {
    let field = if e.is_data() { "json data" } else { "json syntax" };
    malformed(field, e)
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => malformed("csv", e),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file)).map_err(json_error)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub dim: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl HamiltonianFile {
    pub fn from_operator(h: &HermitianOperator) -> Self {
        let n = h.dim();
        let part = |f: fn(Complex64) -> f64| (0..n).map(|i| (0..n).map(|j| f(h.entry(i, j))).collect()).collect();
        let imag: Vec<Vec<f64>> = part(|z| z.im);
        let any_imag = imag.iter().flatten().any(|x| *x != 0.0);
        Self { dim: n, real: part(|z| z.re), imag: any_imag.then_some(imag) }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let n = self.dim;
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        check_square("real", &self.real, n)?;
        if let Some(im) = &self.imag {
            check_square("imag", im, n)?;
        }
        let m = CMatrix::from_fn(n, |i, j| {
            let im = self.imag.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.real[i][j], im)
        });
        HermitianOperator::new(m)
    }
}

fn check_square(field: &str, rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(malformed(field, format!("expected {n} rows, got {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(malformed(format!("{field}[{i}]"), format!("expected {n} entries, got {}", row.len())));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(malformed(format!("{field}[{i}][{j}]"), "not a finite number"));
        }
    }
    Ok(())
}

pub fn parse_hamiltonian(text: &str) -> Result<HermitianOperator> {
    serde_json::from_str::<HamiltonianFile>(text).map_err(json_error)?.to_operator()
}

pub fn load_hamiltonian(path: &Path) -> Result<HermitianOperator> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_hamiltonian(&text)
}

pub fn save_hamiltonian(path: &Path, h: &HermitianOperator) -> Result<()> {
    write_json(path, &HamiltonianFile::from_operator(h))
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    t: f64,
    p: f64,
    ne: u64,
    seed: u64,
}

pub fn write_trace_csv<W: Write>(trace: &RabiTrace, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (&t, &p) in trace.times.iter().zip(&trace.populations) {
        out.serialize(TraceRow { t, p, ne: trace.ensemble_size, seed: trace.seed }).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<RabiTrace> {
    let mut input = csv::Reader::from_reader(r);
    let headers = input.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "p", "ne", "seed"] {
        return Err(malformed("header", format!("expected `t,p,ne,seed`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut trace = RabiTrace { times: Vec::new(), populations: Vec::new(), ensemble_size: 0, seed: 0 };
    for (k, row) in input.deserialize::<TraceRow>().enumerate() {
        let row = row.map_err(|e| malformed(format!("row {}", k + 1), e))?;
        if k == 0 {
            trace.ensemble_size = row.ne;
            trace.seed = row.seed;
        } else if row.ne != trace.ensemble_size || row.seed != trace.seed {
            return Err(malformed(format!("row {}", k + 1), "ne and seed must be constant"));
        }
        trace.times.push(row.t);
        trace.populations.push(row.p);
    }
    trace.validate()?;
    Ok(trace)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes CSV, or JSON when the path ends in `.json`.
pub fn save_trace(path: &Path, trace: &RabiTrace) -> Result<()> {
    if is_json(path) {
        return write_json(path, trace);
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_trace_csv(trace, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: &Path) -> Result<RabiTrace> {
    let trace = if is_json(path) { read_json::<RabiTrace>(path)? } else { read_trace_csv(File::open(path)?)? };
    trace.validate()?;
    Ok(trace)
}

/// Sidecar written next to a spectrum CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub h0: f64,
    pub h01: f64,
    pub omega_p: f64,
    pub noise_mean: f64,
    pub noise_sd: f64,
    pub resolution: f64,
    pub num_samples: usize,
    pub guard: usize,
    pub frequency_units: String,
}

impl SpectrumSummary {
    pub fn of(spec: &Spectrum) -> Self {
        Self {
            h0: spec.h0(),
            h01: spec.h01(),
            omega_p: spec.omega_p(),
            noise_mean: spec.noise_mean,
            noise_sd: spec.noise_sd,
            resolution: spec.resolution,
            num_samples: spec.num_samples,
            guard: spec.guard,
            frequency_units: ANGULAR.into(),
        }
    }
}

pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["omega", "amp"]).map_err(csv_error)?;
    for (w, a) in spec.freqs.iter().zip(&spec.amps) {
        out.serialize((w, a)).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
pub fn save_spectrum(dir: &Path, stem: &str, spec: &Spectrum) -> Result<[std::path::PathBuf; 2]> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let mut w = BufWriter::new(File::create(&csv_path)?);
    write_spectrum_csv(spec, &mut w)?;
    w.flush()?;
    write_json(&json_path, &SpectrumSummary::of(spec))?;
    Ok([csv_path, json_path])
}

/// Output of the estimate command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub eps_low: f64,
    pub eps_high: Option<f64>,
    pub d_eps_low: f64,
    pub d_eps_high: Option<f64>,
    pub h0: f64,
    pub h01: f64,
    pub noise_mean: f64,
    pub noise_sd: f64,
    pub omega_p: f64,
    pub resolution: f64,
    pub samples_in: usize,
    pub samples_kept: usize,
    pub trial_full: f64,
    pub trial_kept: f64,
    pub flags: Vec<String>,
    pub frequency_units: String,
    /// The `d_eps_*` fields are one-sigma uncertainties.
    pub uncertainty_convention: String,
}

impl EstimateReport {
    pub fn new(analysis: &Analysis, samples_in: usize) -> Self {
        let e = &analysis.estimate;
        Self {
            eps_low: e.eps_low,
            eps_high: e.eps_high,
            d_eps_low: e.d_eps_low,
            d_eps_high: e.d_eps_high,
            h0: e.h0,
            h01: e.h01,
            noise_mean: analysis.stats.noise_mean,
            noise_sd: e.noise_sd,
            omega_p: analysis.stats.omega_p,
            resolution: analysis.resolution,
            samples_in,
            samples_kept: analysis.kept,
            trial_full: analysis.trial_full,
            trial_kept: analysis.trial_kept,
            flags: e.flags.names().map(String::from).collect(),
            frequency_units: ANGULAR.into(),
            uncertainty_convention: "d_eps_* are one sigma: the off-peak channel standard deviation propagated through h0 + 2 h01".into(),
        }
    }
}

pub const TRIAL_HEADER: [&str; 8] = ["seed", "N", "eps_analytic", "eps_low", "eps_high", "d_eps_low", "d_eps_high", "flags"];

/// Appends trial rows, writing the header only to an empty file.
pub fn append_trials(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = csv::WriterBuilder::new().has_headers(fresh).from_writer(BufWriter::new(file));
    if fresh && records.is_empty() {
        out.write_record(TRIAL_HEADER).map_err(csv_error)?;
    }
    for r in records {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut input = csv::Reader::from_reader(File::open(path)?);
    input
        .deserialize::<TrialRecord>()
        .enumerate()
        .map(|(k, r)| r.map_err(|e| malformed(format!("{} row {}", path.display(), k + 1), e)))
        .collect()
}

/// Trials from `path`, or nothing when the file does not exist yet.
pub fn read_trials_if_present(path: &Path) -> Result<Vec<TrialRecord>> {
    if path.exists() {
        read_trials(path)
    } else {
        Ok(Vec::new())
    }
}

pub fn load_decoherence_config(path: &Path) -> Result<DecoherenceConfig> {
    let cfg: DecoherenceConfig = read_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Writes a header and rows of plain values.
pub fn write_table<W: Write, R: Serialize>(w: W, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header).map_err(csv_error)?;
    for r in rows {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{family, Family};
    use crate::sim::{sample_trace, SamplingPlan};

    #[test]
    fn hamiltonian_round_trip() {
        let hb = family(Family::Hb, 0.0).unwrap();
        let text = serde_json::to_string(&HamiltonianFile::from_operator(&hb)).unwrap();
        assert!(!text.contains("imag"));
        assert_eq!(parse_hamiltonian(&text).unwrap(), hb);

        let complex = r#"{"dim": 2, "real": [[0, 1], [1, 1]], "imag": [[0, 0.5], [-0.5, 0]]}"#;
        let h = parse_hamiltonian(complex).unwrap();
        assert_eq!(h.entry(1, 0), Complex64::new(1.0, -0.5));
    }

    #[test]
    fn hamiltonian_errors_name_the_field() {
        let short = r#"{"dim": 2, "real": [[0, 1], [1]]}"#;
        match parse_hamiltonian(short) {
            Err(Error::Malformed { field, .. }) => assert_eq!(field, "real[1]"),
            other => panic!("{other:?}"),
        }
        let skew = r#"{"dim": 2, "real": [[0, 1], [0.5, 1]]}"#;
        assert!(matches!(parse_hamiltonian(skew), Err(Error::NonHermitianInput { .. })));
        assert!(matches!(parse_hamiltonian(r#"{"dim": 1, "real": [[0]]}"#), Err(Error::InvalidDimension(1))));
        assert!(matches!(parse_hamiltonian("{"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn trace_csv_round_trip_is_exact() {
        let hn = family(Family::Hn, 0.0).unwrap();
        let plan = SamplingPlan::for_hamiltonian(&hn, 20, 6.0, 512, 3).unwrap();
        let tr = sample_trace(&hn, &plan).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&tr, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,p,ne,seed\n"));
        assert_eq!(read_trace_csv(&buf[..]).unwrap(), tr);
    }

    #[test]
    fn trace_csv_rejects_bad_rows() {
        assert!(read_trace_csv(&b"time,p,ne,seed\n0,1,0,0\n"[..]).is_err());
        assert!(read_trace_csv(&b"t,p,ne,seed\n0,1,0,0\n0.1,x,0,0\n"[..]).is_err());
        assert!(read_trace_csv(&b"t,p,ne,seed\n0,1,0,0\n0.1,1,4,0\n"[..]).is_err());
        assert!(read_trace_csv(&b"t,p,ne,seed\n0,1.5,0,0\n"[..]).is_err());
    }

    #[test]
    fn trials_append_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        let rec = |seed| TrialRecord {
            seed,
            n_levels: 4,
            eps_analytic: 1e-3,
            eps_low: 9e-4,
            eps_high: if seed == 2 { None } else { Some(1.1e-3) },
            d_eps_low: 1e-4,
            d_eps_high: if seed == 2 { None } else { Some(1e-4) },
            flags: if seed == 2 { "eps_high_undefined".into() } else { String::new() },
        };
        append_trials(&path, &[rec(1)]).unwrap();
        append_trials(&path, &[rec(2), rec(3)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRIAL_HEADER.join(","));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_trials(&path).unwrap(), vec![rec(1), rec(2), rec(3)]);
    }

    #[test]
    fn decoherence_config_keys() {
        let cfg: DecoherenceConfig =
            serde_json::from_str(r#"{"theta": 1.5707963267948966, "d": 1, "gx": 1e-3, "gy": 0, "gz": 0}"#).unwrap();
        assert_eq!(cfg.gap, 1.0);
        assert_eq!(cfg.regime_factor, 50.0);
    }
}
