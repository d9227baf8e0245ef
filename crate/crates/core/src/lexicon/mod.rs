//! Seed dictionary construction, filtering and train/test splitting.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

mod backend;
mod budget;
mod split;
mod translate;

pub use backend::{BackendError, CachedBackend, StaticTable, TranslationBackend};
pub use budget::CharBudget;
pub use split::{split_dictionary, train_count, SplitSpec};
pub use translate::{translate_batch, TranslationOutcome};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("budget exceeded after {index} words ({which} limit)")]
    BudgetExceeded {
        /// Position in the request list of the first word not translated.
        index: usize,
        which: BudgetLimit,
        /// Everything translated before the limit was hit.
        partial: Box<TranslationOutcome>,
    },
    #[error("{0:?} is not a single token")]
    NotSingleToken(String),
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("malformed dictionary entry at line {line}")]
    Format { line: usize },
    #[error("budget state: {0}")]
    BudgetState(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetLimit {
    Daily,
    Monthly,
}

impl std::fmt::Display for BudgetLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BudgetLimit::Daily => "daily",
            BudgetLimit::Monthly => "monthly",
        })
    }
}

fn is_single_token(w: &str) -> bool {
    !w.is_empty() && !w.chars().any(char::is_whitespace)
}

/// Ordered, duplicate-free list of (source, target) word pairs.
///
/// A source word may appear with several targets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilingualDictionary {
    pairs: Vec<(String, String)>,
    seen: HashSet<(String, String)>,
}

impl BilingualDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dictionary, dropping repeated pairs.
    pub fn from_pairs<S, T>(pairs: impl IntoIterator<Item = (S, T)>) -> Result<Self, LexiconError>
    where
        S: Into<String>,
        T: Into<String>,
    {
        let mut d = Self::new();
        for (s, t) in pairs {
            d.insert(s, t)?;
        }
        Ok(d)
    }

    /// Appends a pair. Returns `false` if it was already present.
    pub fn insert(&mut self, source: impl Into<String>, target: impl Into<String>) -> Result<bool, LexiconError> {
        let (s, t) = (source.into(), target.into());
        for w in [&s, &t] {
            if !is_single_token(w) {
                return Err(LexiconError::NotSingleToken(w.clone()));
            }
        }
        if !self.seen.insert((s.clone(), t.clone())) {
            return Ok(false);
        }
        self.pairs.push((s, t));
        Ok(true)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct source words in first-appearance order.
    pub fn sources(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.pairs
            .iter()
            .map(|(s, _)| s.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    /// All targets listed for `source`, in order.
    pub fn targets_for<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.pairs
            .iter()
            .filter(move |(s, _)| s == source)
            .map(|(_, t)| t.as_str())
    }

    /// One `source<TAB>target` line per pair.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (s, t) in &self.pairs {
            writeln!(w, "{s}\t{t}")?;
        }
        w.flush()
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self, LexiconError> {
        let mut d = Self::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let bad = || LexiconError::Format { line: i + 1 };
            let (s, t) = line.split_once('\t').ok_or_else(bad)?;
            d.insert(s, t).map_err(|_| bad())?;
        }
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::read_tsv(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        self.write_tsv(BufWriter::new(File::create(path)?))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_multiword_entries() {
        let mut d = BilingualDictionary::new();
        assert!(matches!(d.insert("give", "fel ad"), Err(LexiconError::NotSingleToken(_))));
        assert!(d.insert("", "x").is_err());
        assert!(d.insert("dog", "koer").unwrap());
        assert!(!d.insert("dog", "koer").unwrap());
        assert!(d.insert("dog", "peni").unwrap());
        assert_eq!(d.len(), 2);
        assert_eq!(d.sources(), ["dog"]);
        assert_eq!(d.targets_for("dog").collect::<Vec<_>>(), ["koer", "peni"]);
    }

    #[test]
    fn tsv_round_trip() {
        let d = BilingualDictionary::from_pairs([("dog", "koer"), ("cat", "kass")]).unwrap();
        let mut buf = Vec::new();
        d.write_tsv(&mut buf).unwrap();
        assert_eq!(buf, b"dog\tkoer\ncat\tkass\n");
        assert_eq!(BilingualDictionary::read_tsv(&buf[..]).unwrap(), d);
        assert!(matches!(
            BilingualDictionary::read_tsv(&b"dog\tkoer\ncat kass\n"[..]),
            Err(LexiconError::Format { line: 2 })
        ));
    }
}
