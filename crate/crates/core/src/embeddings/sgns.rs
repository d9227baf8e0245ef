//! Skip-gram with negative sampling.
//!
//! Each training event pairs a center word with one observed context word
//! and `negatives` noise words drawn from the unigram distribution raised
//! to the 0.75 power. The per-event objective is
//!
//! ```text
//! J = log σ(context · center) + Σ_k log σ(−noise_k · center)
//! ```
//!
//! and is maximized by plain SGD with a linearly decaying learning rate.
//! Only the center (input) matrix is kept after training.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dot, EmbeddingError, EmbeddingTable};
use crate::corpus::build_vocab;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dimension: usize,
    /// Maximum distance between center and context word. The effective
    /// window is sampled uniformly from `1..=window` for every center word.
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    /// Floor reached by the linear decay at the end of training.
    pub min_learning_rate: f64,
    pub seed: u64,
    /// Worker threads. With more than one, updates race (Hogwild style) and
    /// results are no longer reproducible.
    pub threads: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dimension: 300,
            window: 5,
            epochs: 10,
            negatives: 5,
            min_count: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            seed: 1,
            threads: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let check = |ok: bool, msg| if ok { Ok(()) } else { Err(EmbeddingError::InvalidConfig(msg)) };
        check(self.dimension >= 1, "dimension must be at least 1")?;
        check(self.window >= 1, "window must be at least 1")?;
        check(self.epochs >= 1, "epochs must be at least 1")?;
        check(self.negatives >= 1, "negatives must be at least 1")?;
        check(self.min_count >= 1, "min_count must be at least 1")?;
        check(self.threads >= 1, "threads must be at least 1")?;
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning_rate must be positive",
        )?;
        check(
            self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate,
            "min_learning_rate must lie in [0, learning_rate]",
        )
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Objective value and its gradient for one training event.
#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradient {
    pub objective: f64,
    /// ∂J/∂center
    pub center: Vec<f64>,
    /// ∂J/∂context
    pub context: Vec<f64>,
    /// ∂J/∂noise_k, one per negative
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of the per-event objective with respect to every
/// vector involved. The gradient points uphill.
pub fn sgns_gradient(
    center: &[f64],
    context: &[f64],
    negatives: &[Vec<f64>],
) -> Result<SgnsGradient, EmbeddingError> {
    let d = center.len();
    let check = |v: &[f64]| {
        if v.len() == d {
            Ok(())
        } else {
            Err(EmbeddingError::DimensionMismatch {
                expected: d,
                found: v.len(),
            })
        }
    };
    check(context)?;
    negatives.iter().try_for_each(|n| check(n))?;

    let pos = dot(center, context);
    let pos_coef = 1.0 - sigmoid(pos);
    let mut objective = log_sigmoid(pos);
    let mut g_center: Vec<f64> = context.iter().map(|c| pos_coef * c).collect();
    let g_context = center.iter().map(|v| pos_coef * v).collect();
    let mut g_neg = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = dot(center, n);
        objective += log_sigmoid(-s);
        let coef = sigmoid(s);
        for (g, x) in g_center.iter_mut().zip(n) {
            *g -= coef * x;
        }
        g_neg.push(center.iter().map(|v| -coef * v).collect());
    }
    Ok(SgnsGradient {
        objective,
        center: g_center,
        context: g_context,
        negatives: g_neg,
    })
}

/// Dense matrix with relaxed atomic cells so worker threads can update it
/// without locks. Single-threaded use is plain loads and stores.
struct SharedMatrix {
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    fn from_values(dim: usize, values: impl IntoIterator<Item = f64>) -> Self {
        SharedMatrix {
            dim,
            cells: values.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    fn read_row(&self, i: usize, out: &mut [f64]) {
        let row = &self.cells[i * self.dim..(i + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(row) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_to_row(&self, i: usize, scale: f64, delta: &[f64]) {
        let row = &self.cells[i * self.dim..(i + 1) * self.dim];
        for (c, d) in row.iter().zip(delta) {
            let x = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((x + scale * d).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_values(self) -> Vec<f64> {
        self.cells
            .into_iter()
            .map(|c| f64::from_bits(c.into_inner()))
            .collect()
    }
}

/// Samples word ids proportionally to count^0.75.
struct NoiseDistribution {
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseDistribution { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) as u32
    }
}

struct Trainer<'a> {
    config: &'a SgnsConfig,
    input: SharedMatrix,
    output: SharedMatrix,
    noise: NoiseDistribution,
    total_events: f64,
    processed: AtomicU64,
}

impl Trainer<'_> {
    fn learning_rate(&self) -> f64 {
        let progress = self.processed.load(Ordering::Relaxed) as f64 / self.total_events;
        let c = self.config;
        (c.learning_rate - (c.learning_rate - c.min_learning_rate) * progress).max(c.min_learning_rate)
    }

    fn run_shard(&self, sentences: &[Vec<u32>], worker: u64) {
        let dim = self.config.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(worker + 1);
        let mut center = vec![0.0; dim];
        let mut target = vec![0.0; dim];
        let mut center_delta = vec![0.0; dim];

        for _ in 0..self.config.epochs {
            for sentence in sentences {
                for (pos, &word) in sentence.iter().enumerate() {
                    let lr = self.learning_rate();
                    let reach = self.config.window - rng.random_range(0..self.config.window);
                    let lo = pos.saturating_sub(reach);
                    let hi = (pos + reach).min(sentence.len() - 1);
                    for ctx_pos in lo..=hi {
                        if ctx_pos == pos {
                            continue;
                        }
                        let context = sentence[ctx_pos];
                        self.input.read_row(word as usize, &mut center);
                        center_delta.iter_mut().for_each(|x| *x = 0.0);

                        self.step(context, 1.0, lr, &center, &mut target, &mut center_delta);
                        for _ in 0..self.config.negatives {
                            let noise = self.noise.sample(&mut rng);
                            if noise == context {
                                continue;
                            }
                            self.step(noise, 0.0, lr, &center, &mut target, &mut center_delta);
                        }
                        self.input.add_to_row(word as usize, 1.0, &center_delta);
                    }
                    self.processed.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }

    /// One logistic-regression step against an output vector.
    fn step(
        &self,
        target_id: u32,
        label: f64,
        lr: f64,
        center: &[f64],
        target: &mut [f64],
        center_delta: &mut [f64],
    ) {
        self.output.read_row(target_id as usize, target);
        let g = (label - sigmoid(dot(center, target))) * lr;
        for (d, t) in center_delta.iter_mut().zip(target.iter()) {
            *d += g * t;
        }
        self.output.add_to_row(target_id as usize, g, center);
    }
}

/// Trains embeddings over the words that occur at least `min_count` times.
///
/// Sentences bound the context window; out-of-vocabulary tokens are
/// removed before windows are formed. With `threads == 1` the result is a
/// pure function of the input and the seed.
pub fn train_sgns<S: AsRef<str>>(
    sentences: &[Vec<S>],
    config: &SgnsConfig,
) -> Result<EmbeddingTable, EmbeddingError> {
    config.validate()?;
    let vocab = build_vocab(sentences.iter().flatten(), config.min_count);
    if vocab.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    let words: Vec<String> = vocab.words().map(str::to_owned).collect();
    let counts: Vec<u64> = vocab.entries().iter().map(|&(_, c)| c).collect();
    let ids: std::collections::HashMap<&str, u32> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();
    let encoded: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| ids.get(t.as_ref()).copied()).collect::<Vec<_>>())
        .filter(|s| s.len() > 1)
        .collect();
    let n_tokens: usize = encoded.iter().map(Vec::len).sum();

    let dim = config.dimension;
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init: Vec<f64> = (0..words.len() * dim)
        .map(|_| (init_rng.random::<f64>() - 0.5) / dim as f64)
        .collect();

    let trainer = Trainer {
        config,
        input: SharedMatrix::from_values(dim, init),
        output: SharedMatrix::from_values(dim, std::iter::repeat_n(0.0, words.len() * dim)),
        noise: NoiseDistribution::new(&counts),
        total_events: (n_tokens * config.epochs).max(1) as f64,
        processed: AtomicU64::new(0),
    };

    if config.threads == 1 || encoded.len() < 2 {
        trainer.run_shard(&encoded, 0);
    } else {
        let shards = config.threads.min(encoded.len());
        let per = encoded.len().div_ceil(shards);
        thread::scope(|s| {
            for (i, shard) in encoded.chunks(per).enumerate() {
                let trainer = &trainer;
                s.spawn(move || trainer.run_shard(shard, i as u64));
            }
        });
    }

    let data = trainer.input.into_values();
    if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
        return Err(EmbeddingError::NonFinite(words[pos / dim].clone()));
    }
    EmbeddingTable::new(words, dim, data)
}
