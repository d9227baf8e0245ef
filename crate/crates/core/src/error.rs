use thiserror::Error;

use crate::embeddings::EmbeddingError;
use crate::eval::EvalError;
use crate::lexicon::LexiconError;
use crate::mapping::MappingError;
use crate::retrieval::RetrievalError;

/// Any error produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
