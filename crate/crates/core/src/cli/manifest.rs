// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qconfine::formats::write_json;
use qconfine::Result;

pub const MANIFEST: &str = "manifest.json";

/// Provenance of one command run; lists every file it wrote.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub plan: Value,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resumed_trials: Option<usize>,
}

pub struct Recorder {
    started: Instant,
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl Recorder {
    pub fn new(command: &str, out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                command: command.into(),
                argv: std::env::args().collect(),
                inputs: Vec::new(),
                seed: None,
                plan: Value::Null,
                version: env!("CARGO_PKG_VERSION").into(),
                outputs: Vec::new(),
                duration_s: 0.0,
                resumed_trials: None,
            },
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    pub fn seed(&mut self, seed: u64) {
        self.manifest.seed = Some(seed);
    }

    pub fn plan<T: Serialize>(&mut self, plan: &T) {
        self.manifest.plan = serde_json::to_value(plan).unwrap_or(Value::Null);
    }

    pub fn resumed(&mut self, n: usize) {
        self.manifest.resumed_trials = Some(n);
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Records an output by its name inside the output directory.
    pub fn output(&mut self, path: &Path) {
        let name = path.strip_prefix(&self.out_dir).unwrap_or(path).display().to_string();
        if !self.manifest.outputs.contains(&name) {
            self.manifest.outputs.push(name);
        }
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest.duration_s = self.started.elapsed().as_secs_f64();
        write_json(&self.out_dir.join(MANIFEST), &self.manifest)
    }
}
