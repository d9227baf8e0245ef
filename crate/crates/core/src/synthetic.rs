//! Synthetic bilingual embedding pairs with a known ground-truth rotation.
//!
//! The source table has `n` unit-length rows in uniformly random
//! directions. The target table is `X Q + σ E`, where `Q` is a random
//! orthogonal matrix and `E` has i.i.d. standard normal entries.
//! Source word `s{i}` translates to target word `t{i}`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::embeddings::EmbeddingTable;
use crate::eval::evaluate;
use crate::lexicon::{split_dictionary, BilingualDictionary, SplitSpec};
use crate::mapping::{align, apply_mapping, fit_orthogonal};
use crate::retrieval::{RetrievalConfig, RetrievalMode};
use crate::Error;

pub struct SyntheticPair {
    pub source: EmbeddingTable,
    pub target: EmbeddingTable,
    pub rotation: DMatrix<f64>,
    pub dictionary: BilingualDictionary,
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        z * scale
    })
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// column signs fixed by the diagonal of R.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = gaussian(&mut rng, dim, dim, 1.0).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn to_table(prefix: char, m: &DMatrix<f64>) -> EmbeddingTable {
    let words = (0..m.nrows()).map(|i| format!("{prefix}{i:04}")).collect();
    let data = m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
    EmbeddingTable::new(words, m.ncols(), data).expect("finite synthetic data")
}

/// `n` source rows, their rotated and perturbed targets, and the identity
/// dictionary between them.
pub fn rotated_pair(n: usize, dim: usize, noise: f64, seed: u64) -> SyntheticPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = gaussian(&mut rng, n, dim, 1.0);
    for mut row in x.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let rotation = random_orthogonal(dim, seed.wrapping_add(0x9e37_79b9));
    let mut z = &x * &rotation;
    if noise > 0.0 {
        z += gaussian(&mut rng, n, dim, noise);
    }
    let dictionary = BilingualDictionary::from_pairs((0..n).map(|i| (format!("s{i:04}"), format!("t{i:04}"))))
        .expect("single-token words");
    SyntheticPair {
        source: to_table('s', &x),
        target: to_table('t', &z),
        rotation,
        dictionary,
    }
}

/// Mean precision@1 at one noise level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub nn_pct: f64,
    pub csls_pct: f64,
    pub per_seed: Vec<(f64, f64)>,
}

/// Fits a map on 70% of the identity dictionary and measures nn and CSLS
/// precision@1 on the other 30%, averaged over `seeds` runs per noise level.
pub fn noise_sweep(n: usize, dim: usize, sigmas: &[f64], seeds: u64, k: usize) -> Result<Vec<SweepPoint>, Error> {
    let configs = [
        RetrievalConfig::with_mode(RetrievalMode::Nn),
        RetrievalConfig {
            k,
            ..RetrievalConfig::with_mode(RetrievalMode::Csls)
        },
    ];
    sigmas
        .iter()
        .map(|&sigma| {
            let mut per_seed = Vec::new();
            for seed in 0..seeds {
                let pair = rotated_pair(n, dim, sigma, seed);
                let (train, test) = split_dictionary(&pair.dictionary, &SplitSpec { train_fraction: 0.7, seed })?;
                let aligned = align(&train, &pair.source, &pair.target, true)?;
                let model = fit_orthogonal(&aligned)?;
                let mapped = apply_mapping(&model, &pair.source)?;
                let report = evaluate("synthetic", &test, &mapped, &pair.target, &configs, false)?;
                let pct = |i: usize| report.modes[i].accuracy_pct.unwrap_or(0.0);
                per_seed.push((pct(0), pct(1)));
            }
            let mean = |f: fn(&(f64, f64)) -> f64| per_seed.iter().map(f).sum::<f64>() / per_seed.len().max(1) as f64;
            Ok(SweepPoint {
                sigma,
                nn_pct: mean(|p| p.0),
                csls_pct: mean(|p| p.1),
                per_seed,
            })
        })
        .collect()
}
