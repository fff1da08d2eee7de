//! Losses, backpropagation, adadelta and the minibatch training loop.

pub mod adadelta;
pub mod gradcheck;
pub mod loss;

use std::ops::ControlFlow;
use std::time::Instant;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DefinitionRecord;
use crate::embedding_store::EmbeddingStore;
use crate::encoders::{Encoder, Gradients};
use crate::error::{Error, Result};
use crate::tensor::Real;

use adadelta::{Adadelta, OptimizerState};
use loss::{loss_and_grad, LossConfig, LossKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub shuffle_seed: u64,
    /// Call the observer every this many epochs; 0 disables it.
    pub eval_every: usize,
    pub optimizer: Adadelta,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            max_epochs: 10,
            shuffle_seed: 0,
            eval_every: 0,
            optimizer: Adadelta::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        let a = self.optimizer;
        if !(a.rho > 0.0 && a.rho < 1.0 && a.epsilon > 0.0) {
            return Err(Error::invalid("adadelta needs 0 < rho < 1 and epsilon > 0"));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub skipped_pairs: usize,
    /// Seconds spent on this epoch.
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// Pairs dropped before training (headword missing from the target
    /// store, or no token known to the encoder).
    pub skipped_pairs: usize,
    pub examples: usize,
}

impl TrainingLog {
    pub fn mean_losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }
}

/// Loss and gradients of one example. `negative` is required for rank loss.
pub fn backward<T: Real, S: AsRef<str>>(
    encoder: &Encoder<T>,
    tokens: &[S],
    loss: &LossConfig,
    target: &[T],
    negative: Option<&[T]>,
) -> Result<(T, Gradients<T>)> {
    let (ids, _) = encoder.token_ids(tokens);
    backward_ids(encoder, &ids, loss, target, negative)
}

pub fn backward_ids<T: Real>(
    encoder: &Encoder<T>,
    ids: &[usize],
    loss: &LossConfig,
    target: &[T],
    negative: Option<&[T]>,
) -> Result<(T, Gradients<T>)> {
    if target.len() != encoder.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: encoder.target_dim(),
            actual: target.len(),
        });
    }
    let trace = encoder.forward_trace(ids)?;
    let (value, output_grad) = loss_and_grad(loss, trace.output(), target, negative)?;
    Ok((value, encoder.backprop(&trace, &output_grad)))
}

/// Loss of one example without gradients.
pub fn loss_value<T: Real>(
    encoder: &Encoder<T>,
    ids: &[usize],
    loss: &LossConfig,
    target: &[T],
    negative: Option<&[T]>,
) -> Result<T> {
    let out = encoder.forward_ids(ids)?;
    Ok(loss_and_grad(loss, &out, target, negative)?.0)
}

struct Example {
    ids: Vec<usize>,
    target: usize,
}

fn prepare<T: Real>(
    encoder: &Encoder<T>,
    pairs: &[DefinitionRecord],
    target: &EmbeddingStore,
) -> (Vec<Example>, usize) {
    let mut skipped = 0;
    let mut examples = Vec::with_capacity(pairs.len());
    for r in pairs {
        let Some(t) = target.index_of(&r.headword) else {
            warn!("skipping `{}`: not in the target embedding store", r.headword);
            skipped += 1;
            continue;
        };
        let (ids, _) = encoder.token_ids(&r.tokens);
        if ids.is_empty() {
            warn!("skipping a definition of `{}`: no known tokens", r.headword);
            skipped += 1;
            continue;
        }
        examples.push(Example { ids, target: t });
    }
    (examples, skipped)
}

fn store_vector<T: Real>(store: &EmbeddingStore, i: usize) -> Vec<T> {
    store.vector_at(i).iter().map(|&x| T::lit(x as f64)).collect()
}

/// Trains `encoder` in place. See [`train_with`].
pub fn train<T: Real>(
    encoder: &mut Encoder<T>,
    pairs: &[DefinitionRecord],
    train_config: &TrainConfig,
    loss: &LossConfig,
    target: &EmbeddingStore,
) -> Result<TrainingLog> {
    train_with(encoder, pairs, train_config, loss, target, |_, _| ControlFlow::Continue(()))
}

/// Minibatch training with adadelta.
///
/// Each epoch shuffles the examples, splits them into batches of
/// `batch_size`, and applies one update per batch using the mean gradient.
/// For rank loss every example draws a fresh negative word per epoch,
/// uniformly from the target store minus its own headword. Per-example
/// passes run in parallel but are reduced in example order, so the result
/// depends only on the seeds, data and configuration.
///
/// `observer` is called after every `eval_every`-th epoch; returning
/// `ControlFlow::Break` stops training after that epoch.
pub fn train_with<T, F>(
    encoder: &mut Encoder<T>,
    pairs: &[DefinitionRecord],
    train_config: &TrainConfig,
    loss: &LossConfig,
    target: &EmbeddingStore,
    mut observer: F,
) -> Result<TrainingLog>
where
    T: Real,
    F: FnMut(&EpochRecord, &Encoder<T>) -> ControlFlow<()>,
{
    train_config.validate()?;
    loss.validate()?;
    if target.dim() != encoder.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: encoder.target_dim(),
            actual: target.dim(),
        });
    }
    let (examples, skipped) = prepare(encoder, pairs, target);
    let mut log = TrainingLog {
        epochs: Vec::new(),
        skipped_pairs: skipped,
        examples: examples.len(),
    };
    if examples.is_empty() {
        return Ok(log);
    }
    if loss.kind == LossKind::Rank && target.len() < 2 {
        return Err(Error::invalid("rank loss needs at least two target words"));
    }

    let mut optimizer = OptimizerState::new(encoder, train_config.optimizer);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(train_config.shuffle_seed);
    let mut negative_rng = ChaCha8Rng::seed_from_u64(loss.negative_sampling_seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=train_config.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0f64;

        for batch in order.chunks(train_config.batch_size) {
            let negatives: Vec<Option<usize>> = batch
                .iter()
                .map(|&e| match loss.kind {
                    LossKind::Cosine => None,
                    LossKind::Rank => {
                        let c = examples[e].target;
                        let r = negative_rng.random_range(0..target.len() - 1);
                        Some(if r >= c { r + 1 } else { r })
                    }
                })
                .collect();

            let enc: &Encoder<T> = encoder;
            let results: Vec<Result<(T, Gradients<T>)>> = batch
                .par_iter()
                .zip(&negatives)
                .map(|(&e, neg)| {
                    let ex = &examples[e];
                    let t = store_vector::<T>(target, ex.target);
                    let n = neg.map(|i| store_vector::<T>(target, i));
                    backward_ids(enc, &ex.ids, loss, &t, n.as_deref())
                })
                .collect();

            let mut total: Option<Gradients<T>> = None;
            for r in results {
                let (value, grads) = r?;
                loss_sum += value.to_f64_lossy();
                match &mut total {
                    Some(acc) => acc.accumulate(&grads),
                    None => total = Some(grads),
                }
            }
            let mut grads = total.expect("non-empty batch");
            grads.scale(T::one() / T::lit(batch.len() as f64));
            optimizer.update(encoder, &grads)?;
        }

        let record = EpochRecord {
            epoch,
            mean_loss: loss_sum / examples.len() as f64,
            skipped_pairs: skipped,
            wall_time: started.elapsed().as_secs_f64(),
        };
        info!("epoch {epoch}: mean loss {:.6}", record.mean_loss);
        let stop = train_config.eval_every > 0
            && epoch % train_config.eval_every == 0
            && observer(&record, encoder).is_break();
        log.epochs.push(record);
        if stop {
            info!("stopping early after epoch {epoch}");
            break;
        }
    }
    Ok(log)
}
