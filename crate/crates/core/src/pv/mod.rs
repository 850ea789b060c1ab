//! Paragraph vectors: distributed bag-of-words with negative sampling.
//!
//! A document vector is trained to predict the tokens of its document
//! against sampled noise tokens. Inference for unseen text freezes the
//! output weights and fits only a fresh document vector.

mod io;
mod matrix;
pub mod sgd;
mod train;
mod vocab;

pub use io::{
    decode_model, encode_model, load_model, save_model, MODEL_FORMAT_VERSION, MODEL_MAGIC,
};
pub use matrix::Matrix;
pub use train::{train, train_with_stats, TrainStats};
pub use vocab::Vocabulary;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;
use crate::preproc::TokenSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub vector_size: usize,
    pub epochs: usize,
    /// Corpus cap: documents beyond this count are not trained.
    pub max_samples: usize,
    /// Context window for the optional interleaved skip-gram word training.
    pub window: usize,
    pub negatives: usize,
    pub initial_learning_rate: f32,
    pub final_learning_rate: f32,
    pub min_token_count: usize,
    pub seed: u64,
    pub infer_epochs: usize,
    /// Also train word vectors with skip-gram over `window`.
    pub train_words: bool,
    /// 1 is deterministic. More threads update shared weights lock-free.
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            vector_size: 100,
            epochs: 20,
            max_samples: 5000,
            window: 5,
            negatives: 5,
            initial_learning_rate: 0.025,
            final_learning_rate: 0.0001,
            min_token_count: 2,
            seed: 1,
            infer_epochs: 50,
            train_words: false,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.vector_size < 2 {
            return fail("vector_size must be at least 2");
        }
        if self.max_samples == 0 {
            return fail("max_samples must be positive");
        }
        if self.window == 0 {
            return fail("window must be positive");
        }
        if self.infer_epochs == 0 {
            return fail("infer_epochs must be positive");
        }
        if self.threads == 0 {
            return fail("threads must be positive");
        }
        let (a, b) = (self.initial_learning_rate, self.final_learning_rate);
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return fail("learning rates must be positive and finite");
        }
        if b > a {
            return fail("final_learning_rate must not exceed initial_learning_rate");
        }
        Ok(())
    }

    pub(crate) fn learning_rate(&self, progress: f64) -> f32 {
        let p = progress.clamp(0.0, 1.0) as f32;
        self.initial_learning_rate - (self.initial_learning_rate - self.final_learning_rate) * p
    }
}

/// A fixed-length embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocVector(Vec<f32>);

impl DocVector {
    pub fn new(values: Vec<f32>) -> Self {
        DocVector(values)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f32>> for DocVector {
    fn from(values: Vec<f32>) -> Self {
        DocVector(values)
    }
}

/// Cosine similarity computed in double precision, clamped to `[-1, 1]`.
pub fn cosine(a: &DocVector, b: &DocVector) -> Result<f64> {
    cosine_slices(a.as_slice(), b.as_slice())
}

pub fn cosine_slices(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Result of fitting a document vector for unseen tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub vector: DocVector,
    /// No token was in the vocabulary; `vector` is the untrained initial draw.
    pub low_confidence: bool,
}

/// A trained model for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct PvModel {
    pub language: Language,
    pub config: TrainingConfig,
    pub vocabulary: Vocabulary,
    pub word_vectors: Matrix,
    pub output_weights: Matrix,
    pub doc_vectors: Matrix,
}

impl PvModel {
    pub fn vector_size(&self) -> usize {
        self.config.vector_size
    }

    pub fn doc_vector(&self, doc: usize) -> DocVector {
        DocVector(self.doc_vectors.row(doc).to_vec())
    }

    /// Infer with the configured number of epochs.
    pub fn infer(&self, tokens: &TokenSequence) -> Inference {
        self.infer_vector(tokens, self.config.infer_epochs)
    }

    /// Fit a document vector against the frozen output weights.
    ///
    /// The result depends only on the model, the tokens and `epochs`: the
    /// random stream is seeded from the model seed and a hash of the tokens.
    pub fn infer_vector(&self, tokens: &TokenSequence, epochs: usize) -> Inference {
        let dim = self.vector_size();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ token_hash(tokens));
        let mut vector = random_row(&mut rng, dim);
        let ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.vocabulary.index(t))
            .collect();
        if ids.is_empty() {
            return Inference {
                vector: DocVector(vector),
                low_confidence: true,
            };
        }

        let mut grad = vec![0.0f32; dim];
        let mut negatives = Vec::with_capacity(self.config.negatives);
        for epoch in 0..epochs {
            let lr = self.config.learning_rate(epoch as f64 / epochs as f64);
            for &target in &ids {
                self.vocabulary.sample_negatives(
                    &mut rng,
                    target,
                    self.config.negatives,
                    &mut negatives,
                );
                grad.iter_mut().for_each(|g| *g = 0.0);
                sgd::accumulate_input_gradient(
                    &vector,
                    &self.output_weights,
                    target,
                    &negatives,
                    lr,
                    &mut grad,
                );
                sgd::add_assign(&mut vector, &grad);
            }
        }
        Inference {
            vector: DocVector(vector),
            low_confidence: false,
        }
    }
}

pub(crate) fn random_row<R: Rng>(rng: &mut R, dim: usize) -> Vec<f32> {
    let bound = 0.5 / dim as f32;
    (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
}

/// FNV-1a over the token stream with a unit separator between tokens.
pub(crate) fn token_hash(tokens: &TokenSequence) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for token in tokens {
        for &b in token.as_bytes().iter().chain(std::iter::once(&0x1f)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
