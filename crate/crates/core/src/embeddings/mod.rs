//! Word embedding tables: SGNS training and word2vec text I/O.

use std::collections::HashMap;
use std::io;

use thiserror::Error;

mod sgns;
mod text;

pub use sgns::{sgns_gradient, train_sgns, SgnsConfig, SgnsGradient};
pub use text::{load_embeddings, read_text, save_embeddings, write_text};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("empty vocabulary: no word reaches the minimum count")]
    EmptyVocabulary,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} vector components, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("non-finite component in vector for {0:?}")]
    NonFinite(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A vocabulary with one dense vector per word.
///
/// Vectors are stored row-major. The word list is unique and every
/// component is finite; the table is immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from words and a row-major `words.len() × dim` matrix.
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        if data.len() != words.len() * dim {
            return Err(EmbeddingError::ShapeMismatch {
                expected: words.len() * dim,
                found: data.len(),
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateWord(w.clone()));
            }
        }
        if dim > 0 {
            for (w, row) in words.iter().zip(data.chunks_exact(dim)) {
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(EmbeddingError::NonFinite(w.clone()));
                }
            }
        }
        Ok(EmbeddingTable {
            words,
            index,
            dim,
            data,
        })
    }

    pub fn from_rows<W: Into<String>>(
        rows: impl IntoIterator<Item = (W, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut words = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (w, v) in rows {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            words.push(w.into());
            data.extend(v);
        }
        Self::new(words, dim.unwrap_or(0), data)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Row-major matrix data.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy of this table with every row scaled to unit length. Zero rows
    /// stay zero.
    pub fn normalized(&self) -> EmbeddingTable {
        let mut data = self.data.clone();
        if self.dim > 0 {
            data.chunks_exact_mut(self.dim).for_each(normalize_in_place);
        }
        EmbeddingTable {
            words: self.words.clone(),
            index: self.index.clone(),
            dim: self.dim,
            data,
        }
    }

    /// Same vocabulary, new vectors. `data` must keep the row count.
    pub(crate) fn with_data(&self, dim: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        Self::new(self.words.clone(), dim, data)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize_in_place(row: &mut [f64]) {
    let n = norm(row);
    if n > 0.0 {
        row.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        let w = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(matches!(
            EmbeddingTable::new(w(&["a", "a"]), 1, vec![0.0, 1.0]),
            Err(EmbeddingError::DuplicateWord(_))
        ));
        assert!(matches!(
            EmbeddingTable::new(w(&["a"]), 2, vec![0.0]),
            Err(EmbeddingError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingTable::new(w(&["a"]), 1, vec![f64::NAN]),
            Err(EmbeddingError::NonFinite(_))
        ));
    }

    #[test]
    fn normalized_rows() {
        let t = EmbeddingTable::from_rows([("a", vec![3.0, 4.0]), ("z", vec![0.0, 0.0])]).unwrap();
        let n = t.normalized();
        assert_eq!(n.get("a").unwrap(), [0.6, 0.8]);
        assert_eq!(n.get("z").unwrap(), [0.0, 0.0]);
        assert_eq!(n.index_of("z"), Some(1));
    }
}
