//! Staged command-line pipeline for bilingual lexicon induction.
//!
//! Each stage reads the previous stages' files from the output directory
//! and writes its own. A JSON manifest records content digests of every
//! stage's inputs and outputs, so reruns skip stages whose inputs and
//! settings are unchanged.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod remote;

pub use config::PipelineConfig;
pub use manifest::PipelineManifest;
pub use pipeline::{Pipeline, RunOptions, Stage, StageStatus};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("manifest unreadable, use --reset ({})", .0.display())]
    ManifestUnreadable(PathBuf),
    #[error("output directory is locked by {}; remove it if no other run is active", .0.display())]
    Locked(PathBuf),
    #[error("stage '{0}' incomplete; run it first")]
    Incomplete(Stage),
    #[error("stage '{0}' is out of date and --no-overwrite forbids replacing its outputs")]
    Refused(Stage),
    #[error(transparent)]
    Embedding(#[from] lexalign::embeddings::EmbeddingError),
    #[error(transparent)]
    Vocabulary(#[from] lexalign::corpus::VocabFormatError),
    #[error(transparent)]
    Lexicon(#[from] lexalign::lexicon::LexiconError),
    #[error(transparent)]
    Mapping(#[from] lexalign::mapping::MappingError),
    #[error(transparent)]
    Retrieval(#[from] lexalign::retrieval::RetrievalError),
    #[error(transparent)]
    Eval(#[from] lexalign::eval::EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
