//! Bilingual lexicon induction from monolingual embeddings.
//!
//! The pipeline goes from raw sentence-per-line text to an evaluation
//! report:
//!
//! 1. [`corpus`] tokenizes text and builds frequency-filtered vocabularies.
//! 2. [`embeddings`] trains skip-gram negative-sampling vectors and reads and
//!    writes the word2vec text format.
//! 3. [`lexicon`] builds a seed dictionary through a translation backend,
//!    under a character budget, and splits it into train and test halves.
//! 4. [`mapping`] fits an orthogonal map from source space to target space.
//! 5. [`retrieval`] ranks translation candidates (nn, inverted nn, inverted
//!    softmax, CSLS).
//! 6. [`eval`] measures coverage and precision@1.

pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod lexicon;
pub mod mapping;
pub mod retrieval;
pub mod synthetic;

mod error;
mod numfmt;

pub use error::Error;

pub use corpus::{build_vocab, tokenize, TokenRules, Vocabulary};
pub use embeddings::{load_embeddings, save_embeddings, train_sgns, EmbeddingTable, SgnsConfig};
pub use eval::{accuracy, compare_modes, coverage, EvalReport};
pub use lexicon::{split_dictionary, translate_batch, BilingualDictionary, CharBudget, SplitSpec};
pub use mapping::{align, apply_mapping, fit_orthogonal, AlignedMatrices, MappingModel};
pub use retrieval::{cosine, mean_topk, retrieve, RankedCandidates, RetrievalConfig, RetrievalMode};
