//! Independent reference implementations used to check the library.
//!
//! Nothing here calls into the code paths under test beyond constructing
//! inputs: every formula is evaluated directly, pair by pair.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lexalign::lexicon::BilingualDictionary;
use lexalign::EmbeddingTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_table(rng: &mut ChaCha8Rng, prefix: &str, n: usize, dim: usize) -> EmbeddingTable {
    EmbeddingTable::from_rows((0..n).map(|i| (format!("{prefix}{i}"), normal_vec(rng, dim)))).unwrap()
}

pub fn naive_cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

fn mean_of_best(mut values: Vec<f64>, k: usize) -> f64 {
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values[..k].iter().sum::<f64>() / k as f64
}

/// Full candidate ranking for `query` under `mode`, by direct evaluation
/// of the scoring formula for every (query, target) pair.
pub fn brute_force_ranking(
    mode: &str,
    query: &str,
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    k: usize,
    beta: f64,
) -> Vec<(String, f64)> {
    let x = src.get(query).unwrap();
    let cos_xy: Vec<f64> = tgt.rows().map(|y| naive_cos(x, y)).collect();
    let mut scored: Vec<(usize, f64, f64)> = Vec::new();
    for (t, y) in tgt.rows().enumerate() {
        let c = cos_xy[t];
        let score = match mode {
            "nn" => c,
            "csls" => {
                let r_t = mean_of_best(cos_xy.clone(), k);
                let r_s = mean_of_best(src.rows().map(|s| naive_cos(s, y)).collect(), k);
                2.0 * c - r_t - r_s
            }
            "isf" => {
                let denom: f64 = src.rows().map(|s| (beta * naive_cos(s, y)).exp()).sum();
                (beta * c).exp() / denom
            }
            "inn" => {
                let better = src.rows().filter(|s| naive_cos(s, y) > c).count();
                -((better + 1) as f64)
            }
            other => panic!("unknown mode {other}"),
        };
        scored.push((t, score, c));
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| {
                if mode == "inn" {
                    b.2.partial_cmp(&a.2).unwrap()
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .then(a.0.cmp(&b.0))
    });
    scored
        .into_iter()
        .map(|(t, s, _)| (tgt.word(t).to_owned(), s))
        .collect()
}

/// Coverage and accuracy recomputed with plain set operations.
pub struct NaiveEval {
    pub covered: BTreeSet<String>,
    pub n_test: usize,
    pub coverage_pct: f64,
    pub n_correct: usize,
    pub accuracy_pct: Option<f64>,
}

pub fn naive_eval(
    test: &[(String, String)],
    src_vocab: &BTreeSet<String>,
    tgt_vocab: &BTreeSet<String>,
    top1: &BTreeMap<String, String>,
) -> NaiveEval {
    let sources: BTreeSet<String> = test.iter().map(|(s, _)| s.clone()).collect();
    let covered: BTreeSet<String> = test
        .iter()
        .filter(|(s, t)| src_vocab.contains(s) && tgt_vocab.contains(t))
        .map(|(s, _)| s.clone())
        .collect();
    let n_correct = covered
        .iter()
        .filter(|s| test.contains(&((*s).clone(), top1[*s].clone())))
        .count();
    NaiveEval {
        n_test: sources.len(),
        coverage_pct: 100.0 * covered.len() as f64 / sources.len() as f64,
        accuracy_pct: (!covered.is_empty()).then(|| 100.0 * n_correct as f64 / covered.len() as f64),
        n_correct,
        covered,
    }
}

pub fn dictionary(pairs: &[(String, String)]) -> BilingualDictionary {
    BilingualDictionary::from_pairs(pairs.iter().cloned()).unwrap()
}

/// log σ(u·v) + Σ log σ(−n·v), straight from the definition.
pub fn sgns_objective(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let log_sig = |x: f64| -(1.0 + (-x).exp()).ln();
    log_sig(dot(center, context)) + negatives.iter().map(|n| log_sig(-dot(center, n))).sum::<f64>()
}

/// Central finite differences of [`sgns_objective`] with step `h`, in the
/// order (center, context, negatives...).
pub fn sgns_numeric_gradient(center: &[f64], context: &[f64], negatives: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let mut vectors: Vec<Vec<f64>> = vec![center.to_vec(), context.to_vec()];
    vectors.extend(negatives.iter().cloned());
    let eval = |vs: &[Vec<f64>]| sgns_objective(&vs[0], &vs[1], &vs[2..]);
    let mut grads = Vec::new();
    for which in 0..vectors.len() {
        let mut g = Vec::new();
        for i in 0..vectors[which].len() {
            let mut plus = vectors.clone();
            plus[which][i] += h;
            let mut minus = vectors.clone();
            minus[which][i] -= h;
            g.push((eval(&plus) - eval(&minus)) / (2.0 * h));
        }
        grads.push(g);
    }
    grads
}

/// Component-wise relative error `|a − b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Orthogonal matrix by modified Gram–Schmidt on Gaussian columns
/// (column-major `Vec` of columns).
pub fn gram_schmidt_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < dim {
        let mut v = normal_vec(rng, dim);
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|a| *a /= n);
            cols.push(v);
        }
    }
    cols
}

pub fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..8);
    (0..len)
        .map(|_| {
            let alphabet = ['a', 'b', 'é', 'ő', 'x', 'ž', 'q', 'ü'];
            alphabet[rng.random_range(0..alphabet.len())]
        })
        .collect()
}
