//! Run configuration: JSON file, defaults, and `--a.b value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use zvonkin_core::drift::DriftSpec;
use zvonkin_core::pde::SolverParams;
use zvonkin_core::sde::InitialLaw;
use zvonkin_core::TorusGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, n: 512, period: 2.0 * std::f64::consts::PI, horizon: 1.0, steps: 512 }
    }
}

impl GridConfig {
    pub fn build(&self) -> zvonkin_core::Result<TorusGrid> {
        TorusGrid::new(self.dim, self.n, self.period, self.horizon, self.steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeConfig {
    pub solver: SolverParams,
    /// Fixed resolvent parameter; adaptive selection when absent.
    pub lambda: Option<f64>,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self { solver: SolverParams::default(), lambda: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeConfig {
    pub paths: usize,
    pub seed: u64,
    /// Point mass at the origin when absent.
    pub law: Option<InitialLaw>,
    pub substeps: usize,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self { paths: 10_000, seed: 1, law: None, substeps: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Largest wavenumber of the trigonometric test functions.
    pub m_max: usize,
    /// Bracket window in time units; ten steps when absent.
    pub eps: Option<f64>,
    /// KDE bandwidth; Silverman's rule when absent.
    pub bandwidth: Option<f64>,
    /// Mollification ladder.
    pub n_list: Vec<u32>,
    /// Mollification of the Brownian-bracket runs.
    pub bracket_n: u32,
    /// Mollification of the covariation and density runs.
    pub smooth_n: u32,
    /// Mollification of the smooth drift used for the generator check.
    pub conjugation_n: u32,
    pub probes: usize,
    pub corpus_pairs: usize,
    /// Block count for the martingale increment test.
    pub checkpoints: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            m_max: 4,
            eps: None,
            bandwidth: None,
            n_list: vec![4, 16, 64],
            bracket_n: 4,
            smooth_n: 64,
            conjugation_n: 2,
            probes: 10_000,
            corpus_pairs: 20,
            checkpoints: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub drift: DriftSpec,
    pub pde: PdeConfig,
    pub sde: SdeConfig,
    pub analysis: AnalysisConfig,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            drift: DriftSpec::default(),
            pde: PdeConfig::default(),
            sde: SdeConfig::default(),
            analysis: AnalysisConfig::default(),
            output: PathBuf::from("runs"),
        }
    }
}

/// Short names accepted for common leaves.
const ALIASES: &[(&str, &str)] = &[("M", "paths"), ("N", "n"), ("K", "steps"), ("L", "period"), ("T", "horizon"), ("d", "dim")];

fn canonical_key(k: &str) -> &str {
    ALIASES.iter().find(|(a, _)| *a == k).map(|(_, c)| *c).unwrap_or(k)
}

/// JSON literal if it parses, plain string otherwise.
fn parse_leaf(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').map(canonical_key).collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("malformed override key `{path}`");
    }
    let mut node = root;
    for k in &keys[..keys.len() - 1] {
        if !node.is_object() {
            bail!("override `{path}` descends into a non-object");
        }
        node = node
            .as_object_mut()
            .expect("checked")
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        None => bail!("override `{path}` descends into a non-object"),
    }
}

fn canonicalize(v: &mut Value) {
    if let Value::Object(obj) = v {
        let entries: Vec<(String, Value)> = std::mem::take(obj).into_iter().collect();
        for (k, mut val) in entries {
            canonicalize(&mut val);
            obj.insert(canonical_key(&k).to_string(), val);
        }
    }
}

/// Pairs `--key value` into `(key, value)`; `--key=value` also accepted.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else {
            bail!("expected `--key value`, found `{a}`");
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it.next().with_context(|| format!("override `--{key}` has no value"))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults, then the file (if any), then the overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = serde_json::to_value(RunConfig::default())?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            let mut file: Value =
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
            canonicalize(&mut file);
            merge(&mut value, file);
        }
        for (k, v) in overrides {
            set_path(&mut value, k, parse_leaf(v))?;
        }
        let cfg: RunConfig = serde_json::from_value(value).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build().context("grid section")?;
        self.drift
            .validate()
            .context("drift section: the roughness assumption requires 0 < beta < 1/2")?;
        self.pde.solver.validate().context("pde section")?;
        if let Some(l) = self.pde.lambda {
            if !(l > 0.0) {
                bail!("pde.lambda must be positive");
            }
        }
        if self.sde.paths == 0 || self.sde.substeps == 0 {
            bail!("sde.paths and sde.substeps must be positive");
        }
        self.law().validate(self.grid.dim).context("sde.law")?;
        let a = &self.analysis;
        if a.n_list.is_empty() || a.n_list.windows(2).any(|w| w[0] >= w[1]) || a.n_list[0] == 0 {
            bail!("analysis.n_list must be positive and strictly increasing");
        }
        if let Some(eps) = a.eps {
            let h = self.grid.horizon / self.grid.steps as f64;
            if eps < 2.0 * h {
                bail!("analysis.eps = {eps} is below two time steps ({})", 2.0 * h);
            }
        }
        if let Some(r) = a.bandwidth {
            if !(r > 0.0) {
                bail!("analysis.bandwidth must be positive");
            }
        }
        if a.bracket_n == 0 || a.smooth_n == 0 || a.conjugation_n == 0 {
            bail!("mollification indices must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid.build().expect("validated")
    }

    pub fn law(&self) -> InitialLaw {
        self.sde.law.clone().unwrap_or_else(|| InitialLaw::dirac_origin(self.grid.dim))
    }

    /// Bracket window in steps.
    pub fn bracket_lag(&self) -> usize {
        let h = self.grid.horizon / self.grid.steps as f64;
        self.analysis.eps.map(|e| (e / h).round() as usize).unwrap_or(10)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Hex SHA-256 of `tag` and the canonical JSON of `self`, ignoring the
    /// output directory so identical runs hash alike wherever they land.
    pub fn hash(&self, tag: &str) -> Result<String> {
        let mut content = self.clone();
        content.output = PathBuf::new();
        let mut h = Sha256::new();
        h.update(tag.as_bytes());
        h.update([0u8]);
        h.update(serde_json::to_vec(&content)?);
        Ok(hex::encode(h.finalize()))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
