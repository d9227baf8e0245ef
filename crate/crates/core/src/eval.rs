//! Coverage and precision@1 against a test dictionary.
//!
//! A test source word is *covered* when it has a vector in the source table
//! and at least one of its gold targets has a vector in the target table.
//! Accuracy counts a covered query as correct when its top candidate is any
//! of the gold targets listed for it, and is computed over covered queries
//! only. Counts are over distinct source words.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingTable;
use crate::lexicon::BilingualDictionary;
use crate::retrieval::{retrieve, QueryResult, RetrievalConfig, RetrievalError, RetrievalMode};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test dictionary is empty")]
    EmptyTestSet,
    #[error("prediction for {0:?}, which is not a covered test query")]
    UncoveredPrediction(String),
    #[error("no prediction for covered query {0:?}")]
    MissingPrediction(String),
    #[error("more than one prediction for {0:?}")]
    DuplicatePrediction(String),
    #[error("reports were computed on different test sets")]
    MismatchedTestSets,
    #[error("nothing to compare")]
    NoModes,
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Rounds a percentage to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Order-independent fingerprint of a dictionary (FNV-1a over the sorted
/// pairs), used to check that reports share a test set.
pub fn dictionary_fingerprint(dict: &BilingualDictionary) -> String {
    let mut pairs: Vec<&(String, String)> = dict.pairs().iter().collect();
    pairs.sort();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (s, t) in pairs {
        for b in s.bytes().chain(*b"\t").chain(t.bytes()).chain(*b"\n") {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    /// Covered distinct source words, in first-appearance order.
    pub covered: Vec<String>,
    /// Distinct source words in the test set.
    pub n_test: usize,
    pub n_test_pairs: usize,
    /// Pair rows whose source word is covered.
    pub n_covered_pairs: usize,
    pub coverage_pct: f64,
}

pub fn coverage(test: &BilingualDictionary, src_mapped: &EmbeddingTable, tgt: &EmbeddingTable) -> Coverage {
    let sources = test.sources();
    let covered: Vec<String> = sources
        .iter()
        .filter(|s| src_mapped.contains(s) && test.targets_for(s).any(|t| tgt.contains(t)))
        .map(|s| s.to_string())
        .collect();
    let covered_set: HashSet<&str> = covered.iter().map(String::as_str).collect();
    let n_covered_pairs = test.pairs().iter().filter(|(s, _)| covered_set.contains(s.as_str())).count();
    let coverage_pct = if sources.is_empty() {
        0.0
    } else {
        100.0 * covered.len() as f64 / sources.len() as f64
    };
    Coverage {
        n_test: sources.len(),
        n_test_pairs: test.len(),
        n_covered_pairs,
        coverage_pct,
        covered,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accuracy {
    pub n_covered: usize,
    pub n_correct: usize,
    /// `None` when nothing is covered.
    pub accuracy_pct: Option<f64>,
}

/// Scores top-1 `predictions` given as `(query, predicted target)`.
///
/// There must be exactly one prediction per covered query. With `strict`
/// only the first gold target listed for a query counts as correct.
pub fn accuracy(
    test: &BilingualDictionary,
    coverage: &Coverage,
    predictions: &[(String, String)],
    strict: bool,
) -> Result<Accuracy, EvalError> {
    let covered: HashSet<&str> = coverage.covered.iter().map(String::as_str).collect();
    let mut seen = HashSet::new();
    let mut n_correct = 0;
    for (query, predicted) in predictions {
        if !covered.contains(query.as_str()) {
            return Err(EvalError::UncoveredPrediction(query.clone()));
        }
        if !seen.insert(query.as_str()) {
            return Err(EvalError::DuplicatePrediction(query.clone()));
        }
        let mut gold = test.targets_for(query);
        let correct = if strict {
            gold.next() == Some(predicted.as_str())
        } else {
            gold.any(|g| g == predicted)
        };
        n_correct += usize::from(correct);
    }
    if let Some(missing) = coverage.covered.iter().find(|q| !seen.contains(q.as_str())) {
        return Err(EvalError::MissingPrediction(missing.clone()));
    }
    let n_covered = coverage.covered.len();
    Ok(Accuracy {
        n_covered,
        n_correct,
        accuracy_pct: (n_covered > 0).then(|| 100.0 * n_correct as f64 / n_covered as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: RetrievalMode,
    pub n_covered: usize,
    pub n_correct: usize,
    /// Over covered queries; `null` when nothing is covered.
    pub accuracy_pct: Option<f64>,
    /// Over all distinct test queries.
    pub accuracy_all_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub mode: RetrievalMode,
    pub query: String,
    pub predicted: String,
    pub correct: bool,
}

/// Coverage and per-mode accuracy on one test set. Percentages are rounded
/// to two decimals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub language_pair: String,
    pub test_fingerprint: String,
    pub n_test: usize,
    pub n_test_pairs: usize,
    pub n_covered: usize,
    pub n_covered_pairs: usize,
    pub coverage_pct: f64,
    pub coverage_pairs_pct: f64,
    pub modes: Vec<ModeResult>,
    pub predictions: Vec<PredictionRecord>,
}

/// Runs every retrieval configuration over the covered test queries and
/// collects coverage and accuracy.
pub fn evaluate(
    language_pair: &str,
    test: &BilingualDictionary,
    src_mapped: &EmbeddingTable,
    tgt: &EmbeddingTable,
    configs: &[RetrievalConfig],
    strict: bool,
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let cov = coverage(test, src_mapped, tgt);
    let mut modes = Vec::new();
    let mut records = Vec::new();
    for config in configs {
        let config = RetrievalConfig {
            top_n: Some(1),
            ..config.clone()
        };
        let results = if cov.covered.is_empty() {
            Vec::new()
        } else {
            retrieve(&cov.covered, src_mapped, tgt, &config)?
        };
        let predictions: Vec<(String, String)> = results
            .iter()
            .filter_map(QueryResult::ranked)
            .filter_map(|r| Some((r.query.clone(), r.top()?.to_owned())))
            .collect();
        let acc = accuracy(test, &cov, &predictions, strict)?;
        let gold: HashMap<&str, Vec<&str>> = cov
            .covered
            .iter()
            .map(|q| (q.as_str(), test.targets_for(q).collect()))
            .collect();
        for (query, predicted) in predictions {
            let golds = &gold[query.as_str()];
            let correct = if strict {
                golds.first() == Some(&predicted.as_str())
            } else {
                golds.contains(&predicted.as_str())
            };
            records.push(PredictionRecord {
                mode: config.mode,
                query,
                predicted,
                correct,
            });
        }
        modes.push(ModeResult {
            mode: config.mode,
            n_covered: acc.n_covered,
            n_correct: acc.n_correct,
            accuracy_pct: acc.accuracy_pct.map(round2),
            accuracy_all_pct: (cov.n_test > 0).then(|| round2(100.0 * acc.n_correct as f64 / cov.n_test as f64)),
        });
    }
    Ok(EvalReport {
        language_pair: language_pair.to_owned(),
        test_fingerprint: dictionary_fingerprint(test),
        n_test: cov.n_test,
        n_test_pairs: cov.n_test_pairs,
        n_covered: cov.covered.len(),
        n_covered_pairs: cov.n_covered_pairs,
        coverage_pct: round2(cov.coverage_pct),
        coverage_pairs_pct: round2(100.0 * cov.n_covered_pairs as f64 / cov.n_test_pairs as f64),
        modes,
        predictions: records,
    })
}

fn fmt_pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.2}"))
}

impl EvalReport {
    /// Plain-text summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "language pair: {}", self.language_pair);
        let _ = writeln!(
            s,
            "coverage: {:.2}% ({} of {} distinct source words; {:.2}% of {} pairs)",
            self.coverage_pct, self.n_covered, self.n_test, self.coverage_pairs_pct, self.n_test_pairs
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<6} {:>9} {:>9} {:>12} {:>12}", "mode", "correct", "covered", "accuracy %", "over all %");
        for m in &self.modes {
            let _ = writeln!(
                s,
                "{:<6} {:>9} {:>9} {:>12} {:>12}",
                m.mode.as_str(),
                m.n_correct,
                m.n_covered,
                fmt_pct(m.accuracy_pct),
                fmt_pct(m.accuracy_all_pct)
            );
        }
        if self.modes.len() > 1 {
            if let Ok(table) = compare_modes(std::slice::from_ref(self)) {
                let _ = writeln!(s);
                let _ = write!(s, "{table}");
            }
        }
        s
    }
}

/// Per-mode accuracies side by side, with deltas against the first mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub language_pair: String,
    pub columns: Vec<(RetrievalMode, Option<f64>)>,
}

impl ComparisonTable {
    pub fn baseline(&self) -> RetrievalMode {
        self.columns[0].0
    }

    /// `(mode, accuracy − baseline accuracy)` for every non-baseline mode.
    pub fn deltas(&self) -> Vec<(RetrievalMode, Option<f64>)> {
        let base = self.columns[0].1;
        self.columns[1..]
            .iter()
            .map(|&(m, acc)| (m, base.zip(acc).map(|(b, a)| round2(a - b))))
            .collect()
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.baseline();
        let mut header = vec![format!("{:<10}", "Language")];
        let mut row = vec![format!("{:<10}", self.language_pair)];
        for (m, acc) in &self.columns {
            let title = format!("{} (%)", m.as_str());
            row.push(format!("{:>width$}", fmt_pct(*acc), width = title.len().max(6)));
            header.push(format!("{:>width$}", title, width = title.len().max(6)));
        }
        for (m, delta) in self.deltas() {
            let title = format!("Δ {}−{}", m.as_str(), base.as_str());
            let width = title.chars().count().max(7);
            let value = delta.map_or_else(|| "n/a".to_owned(), |d| format!("{d:+.2}"));
            row.push(format!("{value:>width$}"));
            header.push(format!("{title:>width$}"));
        }
        writeln!(f, "{}", header.join(" | "))?;
        writeln!(f, "{}", row.join(" | "))
    }
}

/// Lines up the modes of one or more reports on the same test set.
pub fn compare_modes(reports: &[EvalReport]) -> Result<ComparisonTable, EvalError> {
    let first = reports.first().ok_or(EvalError::NoModes)?;
    if reports.iter().any(|r| r.test_fingerprint != first.test_fingerprint) {
        return Err(EvalError::MismatchedTestSets);
    }
    let columns: Vec<_> = reports
        .iter()
        .flat_map(|r| r.modes.iter().map(|m| (m.mode, m.accuracy_pct)))
        .collect();
    if columns.is_empty() {
        return Err(EvalError::NoModes);
    }
    Ok(ComparisonTable {
        language_pair: first.language_pair.clone(),
        columns,
    })
}
