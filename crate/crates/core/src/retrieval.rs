//! Translation retrieval in a shared embedding space.
//!
//! For a mapped source vector `x` and a target vector `y`, with `c = cos(x, y)`:
//!
//! | mode   | score                                                        |
//! |--------|--------------------------------------------------------------|
//! | `nn`   | `c`                                                          |
//! | `csls` | `2c − r_T(x) − r_S(y)`, `r` = mean cosine of the K nearest   |
//! | `isf`  | `exp(βc) / Σ_{x'} exp(β cos(x', y))`, sum over all sources   |
//! | `inn`  | `−rank` of `x` among all sources ordered by `cos(·, y)`      |
//!
//! `r_T(x)` is taken over the target table and `r_S(y)` over the mapped
//! source table. Candidates are ordered by descending score; `inn` breaks
//! score ties by cosine, and any remaining tie goes to the target that
//! comes first in the target table.

use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{dot, norm, EmbeddingTable};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("neighborhood size {k} exceeds table size {size}")]
    NeighborhoodTooLarge { k: usize, size: usize },
    #[error("invalid retrieval configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("cannot retrieve from an empty embedding table")]
    EmptyTable,
    #[error("unknown retrieval mode {0:?} (expected nn, inn, isf or csls)")]
    UnknownMode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetrievalMode {
    /// Nearest neighbor by cosine.
    Nn,
    /// Inverted nearest neighbor.
    Inn,
    /// Inverted softmax.
    Isf,
    /// Cross-domain similarity local scaling.
    Csls,
}

impl RetrievalMode {
    pub const ALL: [RetrievalMode; 4] = [RetrievalMode::Nn, RetrievalMode::Inn, RetrievalMode::Isf, RetrievalMode::Csls];

    pub fn as_str(self) -> &'static str {
        match self {
            RetrievalMode::Nn => "nn",
            RetrievalMode::Inn => "inn",
            RetrievalMode::Isf => "isf",
            RetrievalMode::Csls => "csls",
        }
    }
}

impl fmt::Display for RetrievalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetrievalMode {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RetrievalMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| RetrievalError::UnknownMode(s.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    pub mode: RetrievalMode,
    /// CSLS neighborhood size.
    pub k: usize,
    /// Inverse temperature of the inverted softmax.
    pub beta: f64,
    /// Rows per similarity block; results do not depend on it.
    pub batch_size: usize,
    /// Keep only this many candidates per query.
    pub top_n: Option<usize>,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            mode: RetrievalMode::Nn,
            k: 10,
            beta: 30.0,
            batch_size: 512,
            top_n: None,
        }
    }
}

impl RetrievalConfig {
    pub fn with_mode(mode: RetrievalMode) -> Self {
        RetrievalConfig {
            mode,
            ..Self::default()
        }
    }
}

/// Ranked translation candidates for one query word.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedCandidates {
    pub query: String,
    /// `(target word, score)` by descending score.
    pub candidates: Vec<(String, f64)>,
}

impl RankedCandidates {
    pub fn top(&self) -> Option<&str> {
        self.candidates.first().map(|(w, _)| w.as_str())
    }
}

/// Result for one query: a ranking, or a marker that the query word is not
/// in the source table.
#[derive(Clone, Debug, PartialEq)]
pub enum QueryResult {
    Ranked(RankedCandidates),
    Oov(String),
}

impl QueryResult {
    pub fn query(&self) -> &str {
        match self {
            QueryResult::Ranked(r) => &r.query,
            QueryResult::Oov(q) => q,
        }
    }

    pub fn ranked(&self) -> Option<&RankedCandidates> {
        match self {
            QueryResult::Ranked(r) => Some(r),
            QueryResult::Oov(_) => None,
        }
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, RetrievalError> {
    if u.len() != v.len() {
        return Err(RetrievalError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let denom = norm(u) * norm(v);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(u, v) / denom).clamp(-1.0, 1.0))
}

/// Mean of the `k` largest values. Deterministic for a given multiset.
fn top_k_mean(values: &mut [f64], k: usize) -> f64 {
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    if k < values.len() {
        values.select_nth_unstable_by(k - 1, desc);
    }
    let top = &mut values[..k];
    top.sort_unstable_by(desc);
    top.iter().sum::<f64>() / k as f64
}

/// Mean cosine between `x` and its `k` most similar rows of `table`.
pub fn mean_topk(x: &[f64], table: &EmbeddingTable, k: usize) -> Result<f64, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::InvalidConfig("k must be at least 1"));
    }
    if k > table.len() {
        return Err(RetrievalError::NeighborhoodTooLarge { k, size: table.len() });
    }
    let mut sims = table.rows().map(|y| cosine(x, y)).collect::<Result<Vec<_>, _>>()?;
    Ok(top_k_mean(&mut sims, k))
}

/// Ranks every target word for each query.
///
/// Query words missing from `src_mapped` yield [`QueryResult::Oov`];
/// results come back in query order.
pub fn retrieve<S: AsRef<str>>(
    queries: &[S],
    src_mapped: &EmbeddingTable,
    tgt: &EmbeddingTable,
    config: &RetrievalConfig,
) -> Result<Vec<QueryResult>, RetrievalError> {
    validate(src_mapped, tgt, config)?;
    let src = src_mapped.normalized();
    let tgt_n = tgt.normalized();
    let n_t = tgt_n.len();

    let rows: Vec<Option<usize>> = queries.iter().map(|q| src.index_of(q.as_ref())).collect();
    let known: Vec<usize> = rows.iter().flatten().copied().collect();

    // cos(query, target) for every known query, row-major.
    let mut cos = vec![0.0; known.len() * n_t];
    for (&q, out) in known.iter().zip(cos.chunks_mut(n_t)) {
        let x = src.row(q);
        for (t, o) in out.iter_mut().enumerate() {
            *o = dot(x, tgt_n.row(t));
        }
    }

    let scores = match config.mode {
        RetrievalMode::Nn => cos.clone(),
        RetrievalMode::Csls => {
            let r_src = per_target(&src, &tgt_n, config.batch_size, |sims| top_k_mean(sims, config.k));
            let mut scores = cos.clone();
            for row in scores.chunks_mut(n_t) {
                let r_tgt = top_k_mean(&mut row.to_vec(), config.k);
                for (s, r) in row.iter_mut().zip(&r_src) {
                    *s = 2.0 * *s - r_tgt - r;
                }
            }
            scores
        }
        RetrievalMode::Isf => {
            let beta = config.beta;
            let stats = per_target(&src, &tgt_n, config.batch_size, |sims| {
                let m = sims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let denom: f64 = sims.iter().map(|c| (beta * (c - m)).exp()).sum();
                (m, denom)
            });
            let mut scores = cos.clone();
            for row in scores.chunks_mut(n_t) {
                for (s, &(m, denom)) in row.iter_mut().zip(&stats) {
                    *s = (beta * (*s - m)).exp() / denom;
                }
            }
            scores
        }
        RetrievalMode::Inn => {
            let mut scores = cos.clone();
            for t_start in (0..n_t).step_by(config.batch_size) {
                let t_end = (t_start + config.batch_size).min(n_t);
                for t in t_start..t_end {
                    let mut sims: Vec<f64> = src.rows().map(|x| dot(x, tgt_n.row(t))).collect();
                    sims.sort_unstable_by(|a, b| b.total_cmp(a));
                    for q in 0..known.len() {
                        let c = cos[q * n_t + t];
                        let better = sims.partition_point(|&s| s > c);
                        scores[q * n_t + t] = -((better + 1) as f64);
                    }
                }
            }
            scores
        }
    };

    let mut next_known = 0;
    let results = queries
        .iter()
        .zip(&rows)
        .map(|(q, row)| {
            if row.is_none() {
                return QueryResult::Oov(q.as_ref().to_owned());
            }
            let i = next_known;
            next_known += 1;
            let score_row = &scores[i * n_t..(i + 1) * n_t];
            let cos_row = &cos[i * n_t..(i + 1) * n_t];
            QueryResult::Ranked(rank(q.as_ref(), score_row, cos_row, tgt, config))
        })
        .collect();
    Ok(results)
}

fn validate(src: &EmbeddingTable, tgt: &EmbeddingTable, config: &RetrievalConfig) -> Result<(), RetrievalError> {
    if src.dim() != tgt.dim() {
        return Err(RetrievalError::DimensionMismatch {
            expected: src.dim(),
            found: tgt.dim(),
        });
    }
    if src.is_empty() || tgt.is_empty() {
        return Err(RetrievalError::EmptyTable);
    }
    if config.batch_size == 0 {
        return Err(RetrievalError::InvalidConfig("batch_size must be at least 1"));
    }
    match config.mode {
        RetrievalMode::Csls => {
            if config.k == 0 {
                return Err(RetrievalError::InvalidConfig("k must be at least 1"));
            }
            for size in [tgt.len(), src.len()] {
                if config.k > size {
                    return Err(RetrievalError::NeighborhoodTooLarge { k: config.k, size });
                }
            }
        }
        RetrievalMode::Isf => {
            if !(config.beta > 0.0 && config.beta.is_finite()) {
                return Err(RetrievalError::InvalidConfig("beta must be positive"));
            }
        }
        RetrievalMode::Nn | RetrievalMode::Inn => {}
    }
    Ok(())
}

/// Applies `f` to the cosines between each target and every source row,
/// processing targets in blocks of `batch` rows.
fn per_target<T>(
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    batch: usize,
    mut f: impl FnMut(&mut [f64]) -> T,
) -> Vec<T> {
    let mut out = Vec::with_capacity(tgt.len());
    let mut block = Vec::with_capacity(batch * src.len());
    for start in (0..tgt.len()).step_by(batch) {
        let end = (start + batch).min(tgt.len());
        block.clear();
        for t in start..end {
            let y = tgt.row(t);
            block.extend(src.rows().map(|x| dot(x, y)));
        }
        for sims in block.chunks_mut(src.len()).take(end - start) {
            out.push(f(sims));
        }
    }
    out
}

fn rank(query: &str, scores: &[f64], cos: &[f64], tgt: &EmbeddingTable, config: &RetrievalConfig) -> RankedCandidates {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let by_cos = config.mode == RetrievalMode::Inn;
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| if by_cos { cos[b].total_cmp(&cos[a]) } else { Ordering::Equal })
            .then(a.cmp(&b))
    });
    if let Some(n) = config.top_n {
        order.truncate(n);
    }
    RankedCandidates {
        query: query.to_owned(),
        candidates: order.into_iter().map(|t| (tgt.word(t).to_owned(), scores[t])).collect(),
    }
}

/// Writes `query<TAB>rank<TAB>candidate<TAB>score` rows, at most `top_n`
/// per query, ranks starting at 1. OOV queries produce no rows.
pub fn write_predictions<W: Write>(results: &[QueryResult], top_n: usize, mut w: W) -> io::Result<()> {
    for r in results.iter().filter_map(QueryResult::ranked) {
        for (i, (cand, score)) in r.candidates.iter().take(top_n).enumerate() {
            writeln!(w, "{}\t{}\t{}\t{:.6}", r.query, i + 1, cand, score)?;
        }
    }
    w.flush()
}
