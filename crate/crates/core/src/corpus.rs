//! Sentence tokenization and vocabulary construction.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Rules applied to every token, for both corpora and dictionary entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenRules {
    pub lowercase: bool,
    /// Apply canonical composition (NFC) before any comparison.
    pub unicode_normalization: bool,
    /// Tokens with fewer characters are dropped.
    pub min_token_length: usize,
}

impl Default for TokenRules {
    fn default() -> Self {
        TokenRules {
            lowercase: true,
            unicode_normalization: true,
            min_token_length: 1,
        }
    }
}

impl TokenRules {
    fn normalize(&self, s: &str) -> String {
        if self.unicode_normalization {
            s.nfc().collect()
        } else {
            s.to_owned()
        }
    }

    /// Cleans a single whitespace-free piece. Returns `None` if the piece
    /// does not survive the rules.
    fn clean_piece(&self, piece: &str) -> Option<String> {
        let piece = if self.lowercase {
            self.normalize(&piece.to_lowercase())
        } else {
            piece.to_owned()
        };
        if piece.chars().any(char::is_numeric) {
            return None;
        }
        let stripped = piece.trim_matches(|c: char| !c.is_alphabetic());
        if stripped.is_empty() || stripped.chars().count() < self.min_token_length {
            return None;
        }
        Some(stripped.to_owned())
    }
}

/// Splits a line into cleaned tokens.
///
/// Text is NFC-normalized, split on whitespace, lowercased, and stripped of
/// leading and trailing non-letter characters. Pieces that end up empty or
/// that contain a digit anywhere are dropped.
pub fn tokenize(line: &str, rules: &TokenRules) -> Vec<String> {
    let line = rules.normalize(line);
    line.split_whitespace()
        .filter_map(|piece| rules.clean_piece(piece))
        .collect()
}

/// Word counts filtered by a minimum frequency, in canonical order:
/// descending count, then lexicographic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    min_count: u64,
}

impl Vocabulary {
    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.entries.iter().find(|(w, _)| w == word).map(|&(_, c)| c)
    }

    /// Total number of counted tokens.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    /// Writes one `word<TAB>count` line per entry.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (word, count) in &self.entries {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Vocabulary::write`]. Entries are
    /// re-sorted into canonical order and `min_count` is taken as given.
    pub fn read<R: BufRead>(r: R, min_count: u64) -> Result<Self, VocabFormatError> {
        let mut counter = VocabCounter::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = || VocabFormatError::Line { line: i + 1 };
            let (word, count) = line.split_once('\t').ok_or_else(bad)?;
            let count: u64 = count.parse().map_err(|_| bad())?;
            if word.is_empty() || counter.counts.contains_key(word) {
                return Err(bad());
            }
            counter.counts.insert(word.to_owned(), count);
        }
        Ok(counter.finish(min_count))
    }
}

#[derive(Debug, Error)]
pub enum VocabFormatError {
    #[error("malformed vocabulary entry on line {line}")]
    Line { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Accumulates token counts. Counters built over disjoint shards can be
/// merged; the merged result equals counting the concatenated stream.
#[derive(Clone, Debug, Default)]
pub struct VocabCounter {
    counts: HashMap<String, u64>,
}

impl VocabCounter {
    pub fn add(&mut self, token: &str) {
        match self.counts.get_mut(token) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(token.to_owned(), 1);
            }
        }
    }

    pub fn merge(&mut self, other: VocabCounter) {
        for (word, count) in other.counts {
            *self.counts.entry(word).or_insert(0) += count;
        }
    }

    pub fn finish(self, min_count: u64) -> Vocabulary {
        let mut entries: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Vocabulary { entries, min_count }
    }
}

/// Counts tokens and keeps those seen at least `min_count` times.
///
/// # Panics
///
/// Panics if `min_count` is zero.
pub fn build_vocab<I, S>(tokens: I, min_count: u64) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    assert!(min_count >= 1, "min_count must be at least 1");
    let mut counter = VocabCounter::default();
    for t in tokens {
        counter.add(t.as_ref());
    }
    counter.finish(min_count)
}
