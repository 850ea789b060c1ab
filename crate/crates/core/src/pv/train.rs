use std::sync::atomic::{AtomicU32, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sgd::{add_assign, log_sigmoid, sgd_step, sigmoid};
use super::{random_row, Matrix, PvModel, TrainingConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::ingest::CorpusManifest;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainStats {
    /// Mean negative-sampling loss per token occurrence, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub documents: usize,
    /// Documents dropped by the `max_samples` cap.
    pub truncated: usize,
}

pub fn train(corpus: &CorpusManifest, config: &TrainingConfig) -> Result<PvModel> {
    train_with_stats(corpus, config).map(|(model, _)| model)
}

pub fn train_with_stats(
    corpus: &CorpusManifest,
    config: &TrainingConfig,
) -> Result<(PvModel, TrainStats)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(corpus.source_description.clone()));
    }
    let docs = &corpus.documents[..corpus.len().min(config.max_samples)];
    let vocabulary = Vocabulary::build(docs.iter().map(|d| &d.tokens), config.min_token_count);
    if vocabulary.is_empty() {
        return Err(Error::EmptyVocabulary(config.min_token_count));
    }

    let dim = config.vector_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut word_vectors = Matrix::zeros(vocabulary.len(), dim);
    for i in 0..vocabulary.len() {
        word_vectors
            .row_mut(i)
            .copy_from_slice(&random_row(&mut rng, dim));
    }
    let mut doc_vectors = Matrix::zeros(docs.len(), dim);
    for i in 0..docs.len() {
        doc_vectors
            .row_mut(i)
            .copy_from_slice(&random_row(&mut rng, dim));
    }
    let mut model = PvModel {
        language: corpus.language,
        config: config.clone(),
        vocabulary,
        word_vectors,
        output_weights: Matrix::zeros(0, dim),
        doc_vectors,
    };
    model.output_weights = Matrix::zeros(model.vocabulary.len(), dim);

    let ids: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| {
            d.tokens
                .iter()
                .filter_map(|t| model.vocabulary.index(t))
                .collect()
        })
        .collect();

    let epoch_losses = if config.epochs == 0 {
        Vec::new()
    } else if config.threads <= 1 {
        train_sequential(&mut model, &ids, &mut rng)
    } else {
        train_parallel(&mut model, &ids)
    };

    let stats = TrainStats {
        epoch_losses,
        documents: docs.len(),
        truncated: corpus.len() - docs.len(),
    };
    Ok((model, stats))
}

fn train_sequential(model: &mut PvModel, ids: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let config = model.config.clone();
    let dim = config.vector_size;
    let total = (config.epochs * ids.len()) as f64;
    let mut negatives = Vec::with_capacity(config.negatives);
    let mut step = vec![0.0f32; dim];
    let mut input = vec![0.0f32; dim];
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let (mut loss_sum, mut count) = (0.0f64, 0u64);
        for (d, doc) in ids.iter().enumerate() {
            let lr = config.learning_rate((epoch * ids.len() + d) as f64 / total);
            for &target in doc {
                model
                    .vocabulary
                    .sample_negatives(rng, target, config.negatives, &mut negatives);
                step.iter_mut().for_each(|s| *s = 0.0);
                let loss = sgd_step(
                    model.doc_vectors.row(d),
                    &mut model.output_weights,
                    target,
                    &negatives,
                    lr,
                    &mut step,
                );
                add_assign(model.doc_vectors.row_mut(d), &step);
                loss_sum += f64::from(loss);
                count += 1;
            }
            if config.train_words {
                for (pos, &center) in doc.iter().enumerate() {
                    let reach = config.window - rng.gen_range(0..config.window);
                    let lo = pos.saturating_sub(reach);
                    let hi = (pos + reach).min(doc.len() - 1);
                    for (ctx_pos, &context) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                        if ctx_pos == pos {
                            continue;
                        }
                        model.vocabulary.sample_negatives(
                            rng,
                            context,
                            config.negatives,
                            &mut negatives,
                        );
                        input.copy_from_slice(model.word_vectors.row(center));
                        step.iter_mut().for_each(|s| *s = 0.0);
                        sgd_step(
                            &input,
                            &mut model.output_weights,
                            context,
                            &negatives,
                            lr,
                            &mut step,
                        );
                        add_assign(model.word_vectors.row_mut(center), &step);
                    }
                }
            }
        }
        losses.push(if count == 0 {
            0.0
        } else {
            loss_sum / count as f64
        });
    }
    losses
}

/// Lock-free shared weights. Concurrent read-modify-write may lose updates;
/// that is the accepted trade for parallel training.
struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn from_matrix(m: &Matrix) -> Self {
        SharedMatrix {
            cols: m.cols(),
            data: m
                .as_slice()
                .iter()
                .map(|v| AtomicU32::new(v.to_bits()))
                .collect(),
        }
    }

    fn load_row(&self, row: usize, out: &mut [f32]) {
        let base = row * self.cols;
        for (k, o) in out.iter_mut().enumerate() {
            *o = f32::from_bits(self.data[base + k].load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, row: usize, scale: f32, delta: &[f32]) {
        let base = row * self.cols;
        for (k, &d) in delta.iter().enumerate() {
            let cell = &self.data[base + k];
            let v = f32::from_bits(cell.load(Ordering::Relaxed)) + scale * d;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn write_back(&self, m: &mut Matrix) {
        for (dst, src) in m.as_mut_slice().iter_mut().zip(&self.data) {
            *dst = f32::from_bits(src.load(Ordering::Relaxed));
        }
    }
}

fn shared_step(
    input: &[f32],
    output: &SharedMatrix,
    target: usize,
    negatives: &[usize],
    lr: f32,
    step: &mut [f32],
    scratch: &mut [f32],
) -> f32 {
    let mut loss = 0.0;
    for (row, label) in std::iter::once((target, 1.0f32)).chain(negatives.iter().map(|&n| (n, 0.0)))
    {
        output.load_row(row, scratch);
        let f: f32 = input.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum();
        loss -= if label > 0.0 {
            log_sigmoid(f)
        } else {
            log_sigmoid(-f)
        };
        let g = -lr * (sigmoid(f) - label);
        for (s, &o) in step.iter_mut().zip(scratch.iter()) {
            *s += g * o;
        }
        output.add_row(row, g, input);
    }
    loss
}

fn train_parallel(model: &mut PvModel, ids: &[Vec<usize>]) -> Vec<f64> {
    let config = model.config.clone();
    let dim = config.vector_size;
    let output = SharedMatrix::from_matrix(&model.output_weights);
    let words = SharedMatrix::from_matrix(&model.word_vectors);
    let vocabulary = &model.vocabulary;
    let chunk_docs = ids.len().div_ceil(config.threads);

    let doc_chunks: Vec<(usize, &mut [f32])> = model
        .doc_vectors
        .as_mut_slice()
        .chunks_mut(chunk_docs * dim)
        .enumerate()
        .collect();

    let per_worker: Vec<Vec<(f64, u64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = doc_chunks
            .into_iter()
            .map(|(worker, chunk)| {
                let (output, words, config) = (&output, &words, &config);
                let first = worker * chunk_docs;
                let local_ids = &ids[first..(first + chunk.len() / dim)];
                scope.spawn(move || {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1 + worker as u64));
                    let mut negatives = Vec::with_capacity(config.negatives);
                    let mut step = vec![0.0f32; dim];
                    let mut scratch = vec![0.0f32; dim];
                    let mut input = vec![0.0f32; dim];
                    let total = (config.epochs * local_ids.len()).max(1) as f64;
                    let mut losses = Vec::with_capacity(config.epochs);
                    for epoch in 0..config.epochs {
                        let (mut sum, mut count) = (0.0f64, 0u64);
                        for (d, doc) in local_ids.iter().enumerate() {
                            let lr =
                                config.learning_rate((epoch * local_ids.len() + d) as f64 / total);
                            let row = &mut chunk[d * dim..(d + 1) * dim];
                            for &target in doc {
                                vocabulary.sample_negatives(
                                    &mut rng,
                                    target,
                                    config.negatives,
                                    &mut negatives,
                                );
                                step.iter_mut().for_each(|s| *s = 0.0);
                                sum += f64::from(shared_step(
                                    row,
                                    output,
                                    target,
                                    &negatives,
                                    lr,
                                    &mut step,
                                    &mut scratch,
                                ));
                                count += 1;
                                add_assign(row, &step);
                            }
                            if config.train_words {
                                for (pos, &center) in doc.iter().enumerate() {
                                    let reach = config.window - rng.gen_range(0..config.window);
                                    let lo = pos.saturating_sub(reach);
                                    let hi = (pos + reach).min(doc.len() - 1);
                                    for (ctx_pos, &context) in
                                        doc.iter().enumerate().take(hi + 1).skip(lo)
                                    {
                                        if ctx_pos == pos {
                                            continue;
                                        }
                                        vocabulary.sample_negatives(
                                            &mut rng,
                                            context,
                                            config.negatives,
                                            &mut negatives,
                                        );
                                        words.load_row(center, &mut input);
                                        step.iter_mut().for_each(|s| *s = 0.0);
                                        shared_step(
                                            &input,
                                            output,
                                            context,
                                            &negatives,
                                            lr,
                                            &mut step,
                                            &mut scratch,
                                        );
                                        words.add_row(center, 1.0, &step);
                                    }
                                }
                            }
                        }
                        losses.push((sum, count));
                    }
                    losses
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });

    output.write_back(&mut model.output_weights);
    words.write_back(&mut model.word_vectors);

    (0..config.epochs)
        .map(|e| {
            let (sum, count) = per_worker
                .iter()
                .fold((0.0, 0u64), |(s, c), w| (s + w[e].0, c + w[e].1));
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect()
}
