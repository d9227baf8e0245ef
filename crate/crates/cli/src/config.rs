//! Pipeline configuration, read from a TOML file.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every section may be omitted; defaults follow the reference
//! hyperparameters (300-dimensional vectors, window 5, 10 epochs, 70/30
//! split, CSLS with K = 10).

use std::fs;
use std::path::{Path, PathBuf};

use lexalign::retrieval::{RetrievalConfig, RetrievalMode};
use lexalign::{SgnsConfig, SplitSpec, TokenRules};
use serde::{Deserialize, Serialize};

use crate::PipelineError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub source_corpus: PathBuf,
    pub target_corpus: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    /// A ready-made seed dictionary. When set, build-dict copies it instead
    /// of querying the backend.
    #[serde(default)]
    pub dictionary: Option<PathBuf>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Languages {
    pub source: String,
    pub target: String,
}

impl Default for Languages {
    fn default() -> Self {
        Languages {
            source: "src".into(),
            target: "tgt".into(),
        }
    }
}

impl Languages {
    pub fn pair(&self) -> String {
        format!("{}-{}", self.source, self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendKind {
    /// Tab-separated lookup table on disk.
    Static { table: PathBuf },
    /// HTTP translation service.
    Remote {
        endpoint: String,
        #[serde(default = "default_key_var")]
        api_key_env: String,
        #[serde(default = "default_backoff_ms")]
        backoff_ms: u64,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
}

fn default_key_var() -> String {
    "LEXALIGN_API_KEY".into()
}

fn default_backoff_ms() -> u64 {
    500
}

fn default_timeout_s() -> u64 {
    30
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    #[serde(flatten)]
    pub kind: BackendKind,
    #[serde(default = "default_daily")]
    pub daily_limit: u64,
    #[serde(default = "default_monthly")]
    pub monthly_limit: u64,
    /// Translate at most this many of the most frequent source words.
    #[serde(default)]
    pub max_words: Option<usize>,
}

fn default_daily() -> u64 {
    1_000_000
}

fn default_monthly() -> u64 {
    10_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub normalize: bool,
    /// Only the first gold target counts.
    pub strict: bool,
    /// Candidates per query in the prediction dumps.
    pub top_n: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            normalize: true,
            strict: false,
            top_n: 10,
        }
    }
}

fn default_retrieval() -> Vec<RetrievalConfig> {
    vec![
        RetrievalConfig::with_mode(RetrievalMode::Nn),
        RetrievalConfig::with_mode(RetrievalMode::Csls),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub languages: Languages,
    #[serde(default)]
    pub tokens: TokenRules,
    #[serde(default)]
    pub sgns: SgnsConfig,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default = "default_retrieval")]
    pub retrieval: Vec<RetrievalConfig>,
    #[serde(default)]
    pub eval: EvalSettings,
    pub backend: Option<BackendConfig>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        Ok(config)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.source_corpus);
        fix(&mut self.paths.target_corpus);
        fix(&mut self.paths.output_dir);
        fix(&mut self.paths.cache_dir);
        if let Some(d) = &mut self.paths.dictionary {
            fix(d);
        }
        if let Some(BackendConfig {
            kind: BackendKind::Static { table },
            ..
        }) = &mut self.backend
        {
            fix(table);
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sgns.seed = seed;
        self.split.seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.sgns.threads = threads;
        self
    }

    /// Checks that inputs exist and settings are usable.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut inputs = vec![&self.paths.source_corpus, &self.paths.target_corpus];
        inputs.extend(&self.paths.dictionary);
        if let Some(BackendConfig {
            kind: BackendKind::Static { table },
            ..
        }) = &self.backend
        {
            inputs.push(table);
        }
        for p in inputs {
            if !p.is_file() {
                return Err(PipelineError::Config(format!("input file {} does not exist", p.display())));
            }
        }
        if self.paths.dictionary.is_none() && self.backend.is_none() {
            return Err(PipelineError::Config(
                "set either paths.dictionary or a [backend] section".into(),
            ));
        }
        if self.retrieval.is_empty() {
            return Err(PipelineError::Config("no retrieval modes configured".into()));
        }
        self.sgns.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}
