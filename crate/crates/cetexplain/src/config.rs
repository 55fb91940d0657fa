//! Run configuration: a TOML file with flat sections, every key
//! overridable from the command line via `--set section.key=value`.
//!
//! The canonical JSON serialization of the effective config is hashed
//! (SHA-256, truncated hex) and stamped into checkpoints and reports, so
//! artifacts from one pipeline run are verifiably consistent.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::explainer::ExplainConfig;
use crate::graph::{SimMode, ThresholdSource};
use crate::model::TrainConfig;
use crate::synth::SynthSpec;
use crate::{Error, Result};

/// Input/output locations. Relative paths are resolved against the
/// config file's directory by `load`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    pub cell_features: PathBuf,
    pub drug_features: PathBuf,
    pub responses: PathBuf,
    pub output_dir: PathBuf,
    /// Optional explicit target list (triple TSV); empty = derive targets
    /// from held-out response triples the model scores above 0.5.
    pub targets: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            cell_features: PathBuf::from("cell_features.csv"),
            drug_features: PathBuf::from("drug_features.csv"),
            responses: PathBuf::from("responses.tsv"),
            output_dir: PathBuf::from("out"),
            targets: None,
        }
    }
}

/// Graph construction options.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    /// "threshold" or "quantile".
    pub sim_mode: String,
    pub cell_sim_value: f64,
    pub drug_sim_value: f64,
    /// Global IC50 threshold; absent = per-record thresholds.
    pub ic50_threshold: Option<f64>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            sim_mode: "threshold".to_string(),
            cell_sim_value: 0.95,
            drug_sim_value: 0.85,
            ic50_threshold: None,
        }
    }
}

impl GraphConfig {
    pub fn cell_sim_mode(&self) -> Result<SimMode> {
        self.mode(self.cell_sim_value)
    }

    pub fn drug_sim_mode(&self) -> Result<SimMode> {
        self.mode(self.drug_sim_value)
    }

    fn mode(&self, value: f64) -> Result<SimMode> {
        match self.sim_mode.as_str() {
            "threshold" => Ok(SimMode::Threshold(value)),
            "quantile" => Ok(SimMode::Quantile(value)),
            other => Err(Error::Config(format!(
                "sim_mode must be 'threshold' or 'quantile', got '{other}'"
            ))),
        }
    }

    pub fn threshold_source(&self) -> ThresholdSource {
        match self.ic50_threshold {
            Some(t) => ThresholdSource::Global(t),
            None => ThresholdSource::PerRecord,
        }
    }
}

/// Evaluation options.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub k: usize,
    /// Method tags to evaluate; subset of {"CETE", "GNNE", "EXPN"}.
    pub methods: Vec<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 10,
            methods: vec!["CETE".into(), "GNNE".into(), "EXPN".into()],
        }
    }
}

/// Top-level run configuration; one artifact drives the whole pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Cross-validation folds; 1 means a single 80/20 split.
    pub folds: usize,
    pub paths: PathsConfig,
    pub graph: GraphConfig,
    pub train: TrainConfig,
    pub explain: ExplainConfig,
    pub eval: EvalConfig,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            folds: 1,
            paths: PathsConfig::default(),
            graph: GraphConfig::default(),
            train: TrainConfig::default(),
            explain: ExplainConfig::default(),
            eval: EvalConfig::default(),
            synth: SynthSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds == 0 {
            return Err(Error::Config("folds must be >= 1".into()));
        }
        self.train.validate()?;
        self.explain.validate()?;
        if self.eval.k == 0 {
            return Err(Error::Config("eval.k must be >= 1".into()));
        }
        for m in &self.eval.methods {
            if !matches!(m.as_str(), "CETE" | "GNNE" | "EXPN") {
                return Err(Error::Config(format!("unknown method tag '{m}'")));
            }
        }
        Ok(())
    }

    /// Truncated SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Load from TOML, apply `--set key=value` overrides, resolve
    /// relative paths against the file's directory, and validate.
    pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        let mut value: toml::Value = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse {
                path: path.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let mut config: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!(
                "bad config {}: {e}",
                path.display()
            )))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.paths.cell_features = resolve(base, &config.paths.cell_features);
        config.paths.drug_features = resolve(base, &config.paths.drug_features);
        config.paths.responses = resolve(base, &config.paths.responses);
        config.paths.output_dir = resolve(base, &config.paths.output_dir);
        config.paths.targets = config.paths.targets.as_ref().map(|t| resolve(base, t));
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to TOML (used by `bench` to emit a ready-to-run
    /// pipeline config).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config to TOML: {e}")))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Apply one `section.key=value` override onto the parsed TOML tree. The
/// value is parsed as TOML, so strings need quotes only when ambiguous.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (key_path, raw_value) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!("override '{spec}' must look like section.key=value"))
    })?;
    let parsed: toml::Value = match format!("v = {raw_value}").parse::<toml::Value>() {
        Ok(toml::Value::Table(t)) => t["v"].clone(),
        _ => toml::Value::String(raw_value.to_string()),
    };
    let segments: Vec<&str> = key_path.split('.').collect();
    let mut node = root;
    for seg in &segments[..segments.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{seg}' in '{spec}' is not a section")))?;
        node = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("override '{spec}' addresses a non-table")))?;
    table.insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}
