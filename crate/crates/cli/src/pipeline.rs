//! The six pipeline stages and the cache logic around them.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use lexalign::corpus::Vocabulary;
use lexalign::embeddings::{load_embeddings, save_embeddings, train_sgns};
use lexalign::eval::{coverage, evaluate};
use lexalign::lexicon::{
    split_dictionary, translate_batch, BilingualDictionary, CachedBackend, CharBudget, StaticTable, TranslationBackend,
};
use lexalign::mapping::{align, apply_mapping, fit_orthogonal};
use lexalign::retrieval::{retrieve, write_predictions, RetrievalConfig};
use lexalign::{build_vocab, tokenize, EvalReport};
use serde::Serialize;

use crate::config::{BackendKind, PipelineConfig};
use crate::manifest::{file_digest, value_digest, DirLock, PipelineManifest, StageRecord, MANIFEST_FILE};
use crate::remote::RemoteBackend;
use crate::PipelineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Stage {
    Preprocess,
    TrainEmbeddings,
    BuildDict,
    Split,
    Map,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Preprocess,
        Stage::TrainEmbeddings,
        Stage::BuildDict,
        Stage::Split,
        Stage::Map,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::TrainEmbeddings => "train-embeddings",
            Stage::BuildDict => "build-dict",
            Stage::Split => "split",
            Stage::Map => "map",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Stage that writes `file` into the output directory.
    fn producer_of(file: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.fixed_outputs().contains(&file))
    }

    fn fixed_outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Preprocess => &["source.tok", "target.tok", "source.vocab", "target.vocab"],
            Stage::TrainEmbeddings => &["source.vec", "target.vec"],
            Stage::BuildDict => &["dictionary.tsv"],
            Stage::Split => &["train.tsv", "test.tsv"],
            Stage::Map => &["mapping.vec", "mapping.json", "source.mapped.vec"],
            Stage::Evaluate => &["report.txt", "report.json"],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

impl fmt::Display for StageStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageStatus::Ran => "done",
            StageStatus::Cached => "cached",
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub no_overwrite: bool,
    pub reset: bool,
}

/// One locked session on an output directory.
pub struct Pipeline {
    config: PipelineConfig,
    out: PathBuf,
    manifest: PipelineManifest,
    options: RunOptions,
    _lock: DirLock,
}

enum Input {
    /// Produced by an earlier stage, named relative to the output dir.
    Artifact(&'static str),
    External(PathBuf),
}

impl Pipeline {
    pub fn open(config: PipelineConfig, options: RunOptions) -> Result<Self, PipelineError> {
        config.validate()?;
        let out = config.paths.output_dir.clone();
        fs::create_dir_all(&out)?;
        let lock = DirLock::acquire(&out)?;
        if options.reset {
            match fs::remove_file(out.join(MANIFEST_FILE)) {
                Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
                _ => {}
            }
        }
        let manifest = PipelineManifest::load(&out)?;
        Ok(Pipeline {
            config,
            out,
            manifest,
            options,
            _lock: lock,
        })
    }

    pub fn manifest(&self) -> &PipelineManifest {
        &self.manifest
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    /// Runs every stage in order and returns the evaluation report.
    pub fn run_all(&mut self, mut on_stage: impl FnMut(Stage, StageStatus)) -> Result<EvalReport, PipelineError> {
        for stage in Stage::ALL {
            let status = self.run_stage(stage)?;
            on_stage(stage, status);
        }
        let text = fs::read_to_string(self.out.join("report.json"))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("report.json: {e}")))
    }

    fn inputs(&self, stage: Stage) -> Vec<Input> {
        let c = &self.config;
        match stage {
            Stage::Preprocess => vec![
                Input::External(c.paths.source_corpus.clone()),
                Input::External(c.paths.target_corpus.clone()),
            ],
            Stage::TrainEmbeddings => vec![Input::Artifact("source.tok"), Input::Artifact("target.tok")],
            Stage::BuildDict => match (&c.paths.dictionary, &c.backend) {
                (Some(d), _) => vec![Input::External(d.clone())],
                (None, Some(b)) => {
                    let mut v = vec![Input::Artifact("source.vocab")];
                    if let BackendKind::Static { table } = &b.kind {
                        v.push(Input::External(table.clone()));
                    }
                    v
                }
                (None, None) => unreachable!("rejected by validate"),
            },
            Stage::Split => vec![Input::Artifact("dictionary.tsv")],
            Stage::Map => vec![
                Input::Artifact("source.vec"),
                Input::Artifact("target.vec"),
                Input::Artifact("train.tsv"),
            ],
            Stage::Evaluate => vec![
                Input::Artifact("source.mapped.vec"),
                Input::Artifact("target.vec"),
                Input::Artifact("test.tsv"),
            ],
        }
    }

    fn outputs(&self, stage: Stage) -> Vec<String> {
        let mut v: Vec<String> = stage.fixed_outputs().iter().map(|s| s.to_string()).collect();
        if stage == Stage::Evaluate {
            v.extend(self.config.retrieval.iter().map(|r| format!("predictions-{}.tsv", r.mode)));
        }
        v.sort();
        v.dedup();
        v
    }

    fn config_digest(&self, stage: Stage) -> String {
        let c = &self.config;
        match stage {
            Stage::Preprocess => value_digest(&(&c.tokens, c.sgns.min_count)),
            Stage::TrainEmbeddings => value_digest(&c.sgns),
            Stage::BuildDict => value_digest(&(&c.languages, &c.tokens, &c.backend, c.paths.dictionary.is_some())),
            Stage::Split => value_digest(&c.split),
            Stage::Map => value_digest(&c.eval.normalize),
            Stage::Evaluate => value_digest(&(&c.languages, &c.retrieval, &c.eval)),
        }
    }

    fn digest_inputs(&self, stage: Stage) -> Result<BTreeMap<String, String>, PipelineError> {
        let mut digests = BTreeMap::new();
        for input in self.inputs(stage) {
            let (key, path) = match input {
                Input::Artifact(name) => {
                    let path = self.out.join(name);
                    if !path.is_file() {
                        let producer = Stage::producer_of(name).expect("artifact has a producer");
                        return Err(PipelineError::Incomplete(producer));
                    }
                    (name.to_owned(), path)
                }
                Input::External(path) => (path.display().to_string(), path),
            };
            digests.insert(key, file_digest(&path)?);
        }
        Ok(digests)
    }

    fn outputs_intact(&self, record: &StageRecord) -> bool {
        record
            .outputs
            .iter()
            .all(|(name, digest)| file_digest(&self.out.join(name)).is_ok_and(|d| &d == digest))
    }

    /// Runs `stage` unless the manifest shows it complete for the current
    /// inputs and settings.
    pub fn run_stage(&mut self, stage: Stage) -> Result<StageStatus, PipelineError> {
        let inputs = self.digest_inputs(stage)?;
        let config_digest = self.config_digest(stage);
        let outputs = self.outputs(stage);
        if let Some(record) = self.manifest.stages.get(stage.name()) {
            let same_outputs = record.outputs.keys().eq(outputs.iter());
            if record.inputs == inputs
                && record.config_digest == config_digest
                && same_outputs
                && self.outputs_intact(record)
            {
                log::info!("{stage}: inputs unchanged, skipping");
                return Ok(StageStatus::Cached);
            }
        }
        if self.options.no_overwrite && outputs.iter().any(|o| self.out.join(o).exists()) {
            return Err(PipelineError::Refused(stage));
        }

        // nothing may claim this stage complete while its outputs are rewritten
        if self.manifest.stages.remove(stage.name()).is_some() {
            self.manifest.save(&self.out)?;
        }
        log::info!("{stage}: running");
        match stage {
            Stage::Preprocess => self.preprocess()?,
            Stage::TrainEmbeddings => self.train_embeddings()?,
            Stage::BuildDict => self.build_dict()?,
            Stage::Split => self.split()?,
            Stage::Map => self.map()?,
            Stage::Evaluate => self.evaluate()?,
        }
        let mut output_digests = BTreeMap::new();
        for name in outputs {
            let digest = file_digest(&self.out.join(&name))?;
            output_digests.insert(name, digest);
        }
        self.manifest.stages.insert(
            stage.name().to_owned(),
            StageRecord {
                inputs,
                config_digest,
                outputs: output_digests,
                completed_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            },
        );
        self.manifest.save(&self.out)?;
        Ok(StageStatus::Ran)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, PipelineError> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn preprocess(&self) -> Result<(), PipelineError> {
        let c = &self.config;
        for (corpus, side) in [(&c.paths.source_corpus, "source"), (&c.paths.target_corpus, "target")] {
            let mut tok = self.create(&format!("{side}.tok"))?;
            let mut sentences = Vec::new();
            for line in BufReader::new(File::open(corpus)?).lines() {
                let tokens = tokenize(&line?, &c.tokens);
                if !tokens.is_empty() {
                    writeln!(tok, "{}", tokens.join(" "))?;
                    sentences.push(tokens);
                }
            }
            tok.flush()?;
            let vocab = build_vocab(sentences.iter().flatten(), c.sgns.min_count);
            vocab.write(self.create(&format!("{side}.vocab"))?)?;
            log::info!("{side}: {} sentences, {} vocabulary words", sentences.len(), vocab.len());
        }
        Ok(())
    }

    fn train_embeddings(&self) -> Result<(), PipelineError> {
        for side in ["source", "target"] {
            let sentences = read_tokens(&self.out.join(format!("{side}.tok")))?;
            let table = train_sgns(&sentences, &self.config.sgns)?;
            save_embeddings(&table, self.out.join(format!("{side}.vec")))?;
        }
        Ok(())
    }

    fn build_dict(&self) -> Result<(), PipelineError> {
        let c = &self.config;
        let dict = match (&c.paths.dictionary, &c.backend) {
            (Some(path), _) => BilingualDictionary::load(path)?,
            (None, Some(b)) => {
                let vocab_file = BufReader::new(File::open(self.out.join("source.vocab"))?);
                let vocab = Vocabulary::read(vocab_file, c.sgns.min_count)?;
                let mut words: Vec<&str> = vocab.words().collect();
                if let Some(max) = b.max_words {
                    words.truncate(max);
                }
                fs::create_dir_all(&c.paths.cache_dir)?;
                let mut budget = CharBudget::open(c.paths.cache_dir.join("budget.json"), b.daily_limit, b.monthly_limit)?;
                budget.advance_to(&chrono::Utc::now().format("%Y-%m-%d").to_string());
                let cache = c.paths.cache_dir.join(format!("{}.tsv", c.languages.pair()));
                let backend: Box<dyn TranslationBackend> = match &b.kind {
                    BackendKind::Static { table } => Box::new(StaticTable::load(table)?),
                    BackendKind::Remote {
                        endpoint,
                        api_key_env,
                        backoff_ms,
                        timeout_s,
                    } => {
                        let key = std::env::var(api_key_env).map_err(|_| {
                            PipelineError::Config(format!("environment variable {api_key_env} is not set"))
                        })?;
                        Box::new(RemoteBackend::new(
                            endpoint,
                            key,
                            c.languages.pair(),
                            Duration::from_millis(*backoff_ms),
                            Duration::from_secs(*timeout_s),
                        ))
                    }
                };
                let mut cached = CachedBackend::open(backend, cache)?;
                let outcome = translate_batch(&words, &mut cached, &mut budget, &c.tokens)?;
                log::info!(
                    "{} pairs from {} words; {} phrase translations and {} unavailable skipped; {} characters charged",
                    outcome.dictionary.len(),
                    words.len(),
                    outcome.skipped_multiword,
                    outcome.skipped_unavailable,
                    outcome.charged_chars
                );
                outcome.dictionary
            }
            (None, None) => unreachable!("rejected by validate"),
        };
        dict.save(self.out.join("dictionary.tsv"))?;
        Ok(())
    }

    fn split(&self) -> Result<(), PipelineError> {
        let dict = BilingualDictionary::load(self.out.join("dictionary.tsv"))?;
        let (train, test) = split_dictionary(&dict, &self.config.split)?;
        train.save(self.out.join("train.tsv"))?;
        test.save(self.out.join("test.tsv"))?;
        Ok(())
    }

    fn map(&self) -> Result<(), PipelineError> {
        let src = load_embeddings(self.out.join("source.vec"))?;
        let tgt = load_embeddings(self.out.join("target.vec"))?;
        let train = BilingualDictionary::load(self.out.join("train.tsv"))?;
        let aligned = align(&train, &src, &tgt, self.config.eval.normalize)?;
        log::info!("aligned {} training pairs, {} dropped", aligned.used_pairs.len(), aligned.dropped);
        let model = fit_orthogonal(&aligned)?;
        model.save(&self.out.join("mapping.vec"), &self.out.join("mapping.json"))?;
        let mapped = apply_mapping(&model, &src)?;
        save_embeddings(&mapped, self.out.join("source.mapped.vec"))?;
        Ok(())
    }

    fn evaluate(&self) -> Result<(), PipelineError> {
        let c = &self.config;
        let mapped = load_embeddings(self.out.join("source.mapped.vec"))?;
        let tgt = load_embeddings(self.out.join("target.vec"))?;
        let test = BilingualDictionary::load(self.out.join("test.tsv"))?;
        let report = evaluate(&c.languages.pair(), &test, &mapped, &tgt, &c.retrieval, c.eval.strict)?;
        let covered = coverage(&test, &mapped, &tgt).covered;
        for config in &c.retrieval {
            let mut w = self.create(&format!("predictions-{}.tsv", config.mode))?;
            if !covered.is_empty() {
                let config = RetrievalConfig {
                    top_n: Some(c.eval.top_n),
                    ..config.clone()
                };
                let results = retrieve(&covered, &mapped, &tgt, &config)?;
                write_predictions(&results, c.eval.top_n, &mut w)?;
            }
            w.flush()?;
        }
        write_json(&self.out.join("report.json"), &report)?;
        fs::write(self.out.join("report.txt"), report.to_text())?;
        Ok(())
    }
}

fn read_tokens(path: &Path) -> Result<Vec<Vec<String>>, PipelineError> {
    let mut sentences = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        sentences.push(line?.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect());
    }
    Ok(sentences)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut json = serde_json::to_string_pretty(value).expect("report serializes");
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}
