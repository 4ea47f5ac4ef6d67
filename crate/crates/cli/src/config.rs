//! The pipeline manifest: one JSON file describing inputs, the experiment
//! grid, and every tunable, plus command-line overrides (flags win).
//!
//! A single global seed propagates into the embedding trainer and the
//! evaluation harness, so a manifest plus a seed pins every artifact the
//! CLI writes (byte-identical in deterministic mode).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use lingemb::embedding::TrainConfig;
use lingemb::eval::EvalConfig;
use lingemb::features::FeatureScheme;
use lingemb::models::{ClassifierConfig, Condition, ModelArch};
use serde::{Deserialize, Serialize};

/// Failures split by phase. Validation errors happen before a subcommand
/// touches its outputs and exit 1; runtime errors interrupt work already
/// underway and exit 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

pub fn validation(err: impl fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

pub fn runtime(err: impl fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

/// Flag values that override manifest fields.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub deterministic: bool,
    pub schemes: Vec<String>,
    pub models: Vec<String>,
    pub conditions: Vec<String>,
    pub out: Option<PathBuf>,
}

/// The JSON manifest. Every field has a default so a minimal file (or none
/// at all, for commands that need no inputs) is valid; unknown keys are
/// rejected so typos fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// CoNLL-U treebank used to pretrain embeddings.
    pub corpus: Option<PathBuf>,
    /// Labeled dataset CSV (`id,text,label`).
    pub dataset: Option<PathBuf>,
    /// Companion CoNLL-U stream keyed by `# doc_id = ...` comments.
    pub annotations: Option<PathBuf>,
    /// Pretrained embedding files by scheme name; schemes not listed here
    /// fall back to `<out_dir>/emb-<SCHEME>.vec` when that file exists.
    pub embeddings: BTreeMap<String, PathBuf>,
    pub out_dir: PathBuf,
    pub schemes: Vec<String>,
    pub models: Vec<String>,
    pub conditions: Vec<String>,
    pub folds: usize,
    pub seed: u64,
    pub workers: usize,
    pub deterministic: bool,
    pub train: TrainConfig,
    pub classifier: ClassifierConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            dataset: None,
            annotations: None,
            embeddings: BTreeMap::new(),
            out_dir: PathBuf::from("out"),
            schemes: FeatureScheme::ALL.iter().map(|s| s.name().to_string()).collect(),
            models: ModelArch::ALL.iter().map(|m| m.name().to_string()).collect(),
            conditions: Condition::ALL.iter().map(|c| c.name().to_string()).collect(),
            folds: 10,
            seed: 42,
            workers: 1,
            deterministic: false,
            train: TrainConfig::default(),
            classifier: ClassifierConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Load a manifest, or start from defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| validation(format!("invalid config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, flags: &Overrides) {
        if let Some(seed) = flags.seed {
            self.seed = seed;
        }
        if let Some(workers) = flags.workers {
            self.workers = workers;
        }
        if flags.deterministic {
            self.deterministic = true;
        }
        if !flags.schemes.is_empty() {
            self.schemes = flags.schemes.clone();
        }
        if !flags.models.is_empty() {
            self.models = flags.models.clone();
        }
        if !flags.conditions.is_empty() {
            self.conditions = flags.conditions.clone();
        }
        if let Some(out) = &flags.out {
            self.out_dir = out.clone();
        }
    }

    /// Parse grid names, propagate the global seed, and check every path
    /// the manifest references. Nothing is written on failure.
    pub fn resolve(mut self) -> Result<Resolved, CliError> {
        let schemes = parse_list::<FeatureScheme>("scheme", &self.schemes)?;
        let models = parse_list::<ModelArch>("model", &self.models)?;
        let conditions = parse_list::<Condition>("condition", &self.conditions)?;

        for key in self.embeddings.keys() {
            key.parse::<FeatureScheme>()
                .map_err(|e| validation(format!("embeddings map: {e}")))?;
        }

        let workers = if self.deterministic { 1 } else { self.workers.max(1) };
        self.train.seed = self.seed;
        self.train.worker_count = workers;
        self.train.validate().map_err(validation)?;
        self.classifier.validate().map_err(validation)?;
        let eval = EvalConfig { folds: self.folds, seed: self.seed };
        eval.validate().map_err(validation)?;

        for (role, path) in [
            ("corpus", self.corpus.as_deref()),
            ("dataset", self.dataset.as_deref()),
            ("annotations", self.annotations.as_deref()),
        ] {
            if let Some(p) = path {
                require_exists(role, p)?;
            }
        }
        for (name, path) in &self.embeddings {
            require_exists(&format!("embeddings[{name}]"), path)?;
        }

        Ok(Resolved { schemes, models, conditions, workers, eval, cfg: self })
    }
}

fn parse_list<T>(what: &str, names: &[String]) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr<Err = lingemb::Error> + PartialEq,
{
    if names.is_empty() {
        return Err(validation(format!("at least one {what} is required")));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let parsed: T = name.parse().map_err(validation)?;
        if out.contains(&parsed) {
            return Err(validation(format!("duplicate {what} '{name}'")));
        }
        out.push(parsed);
    }
    Ok(out)
}

fn require_exists(role: &str, path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(validation(format!("{role} path does not exist: {}", path.display())))
    }
}

/// A validated manifest: grid names parsed, seed and worker count pushed
/// into the component configs, referenced paths known to exist.
#[derive(Debug)]
pub struct Resolved {
    pub cfg: PipelineConfig,
    pub schemes: Vec<FeatureScheme>,
    pub models: Vec<ModelArch>,
    pub conditions: Vec<Condition>,
    pub workers: usize,
    pub eval: EvalConfig,
}

impl Resolved {
    pub fn require_dataset(&self) -> Result<&Path, CliError> {
        self.cfg
            .dataset
            .as_deref()
            .ok_or_else(|| validation("this command needs a `dataset` path in the config"))
    }

    /// Where pretrained embeddings for `scheme` come from: the manifest's
    /// map entry, else the conventional `emb-<SCHEME>.vec` under the
    /// output directory when present.
    pub fn embedding_source(&self, scheme: FeatureScheme) -> Option<PathBuf> {
        if let Some(path) = self.cfg.embeddings.get(scheme.name()) {
            return Some(path.clone());
        }
        let conventional = self.cfg.out_dir.join(format!("emb-{}.vec", scheme.name()));
        conventional.exists().then_some(conventional)
    }
}
