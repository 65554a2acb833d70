//! Content-addressed run directories and their manifests.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use zvonkin_core::VerificationReport;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// `<output>/<hash>/` for one subcommand invocation.
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
    command: String,
    outputs: Vec<OutputEntry>,
    started: u64,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn file_sha256(path: &Path) -> Result<(u64, String)> {
    let mut f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        total += n as u64;
        h.update(&buf[..n]);
    }
    Ok((total, hex::encode(h.finalize())))
}

impl RunDir {
    /// Creates the directory and writes the resolved configuration into it.
    pub fn create(cfg: &RunConfig, command: &str) -> Result<Self> {
        let hash = cfg.hash(command)?;
        let path = cfg.output.join(&hash[..16]);
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        fs::write(path.join("config.json"), cfg.to_json()? + "\n")?;
        Ok(Self { path, hash, command: command.to_string(), outputs: Vec::new(), started: unix_now() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Adds an already written file to the manifest.
    pub fn record(&mut self, name: &str) -> Result<()> {
        let (bytes, sha256) = file_sha256(&self.file(name))?;
        self.outputs.retain(|o| o.file != name);
        self.outputs.push(OutputEntry { file: name.to_string(), bytes, sha256 });
        Ok(())
    }

    /// Writes the report files and `manifest.json`; returns the manifest path.
    pub fn finish(mut self, cfg: &RunConfig, report: &VerificationReport, telemetry: Value) -> Result<PathBuf> {
        let mut report = report.clone();
        report.provenance.insert("command".into(), self.command.clone());
        report.provenance.insert("config_hash".into(), self.hash.clone());
        report.provenance.insert("drift_seed".into(), cfg.drift.seed.to_string());
        report.provenance.insert("path_seed".into(), cfg.sde.seed.to_string());
        report.write_to(&self.path)?;
        self.record("report.json")?;
        for s in &report.series {
            self.record(&format!("{}.csv", s.name))?;
        }
        self.record("config.json")?;
        self.outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = json!({
            "command": self.command,
            "config_hash": self.hash,
            "config": cfg,
            "seeds": { "drift": cfg.drift.seed, "paths": cfg.sde.seed },
            "versions": {
                "zvonkin-lab": env!("CARGO_PKG_VERSION"),
                "zvonkin-core": zvonkin_core::VERSION,
            },
            "outputs": self.outputs,
            "telemetry": telemetry,
            "verdict": {
                "passed": report.all_passed(),
                "failed": report.failed_ids(),
            },
            "started_unix": self.started,
            "finished_unix": unix_now(),
        });
        let path = self.file("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}
