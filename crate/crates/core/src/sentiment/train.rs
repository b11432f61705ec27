//! Mini-batch gradient descent over the whole model (embedding rows,
//! attention vector, heads) and a finite-difference gradient check.

use std::collections::BTreeMap;

use serde::Serialize;

use super::encoder::HashedEncoder;
use super::label::{argmax_label, majority_vote, SentimentLabel};
use super::model::{LabeledExample, SentimentModel};
use super::pooling::{dot, softmax};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainParams {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            lr: 0.0005,
            batch_size: 32,
            epochs: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeadEpoch {
    /// Mean cross-entropy over the epoch's batches, before each update.
    pub loss: f64,
    /// Arg-max accuracy on the head's own examples after the epoch.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub heads: [HeadEpoch; 3],
    /// Majority-vote accuracy over all examples after the epoch.
    pub ensemble_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStats>,
}

/// An example resolved to token ids and a head.
#[derive(Debug, Clone)]
struct Prepared {
    ids: Vec<usize>,
    head: usize,
    label: SentimentLabel,
}

fn prepare(model: &SentimentModel, examples: &[LabeledExample]) -> Result<Vec<Prepared>> {
    examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let head = model
                .head_index(ex.dataset)
                .ok_or_else(|| Error::argument(format!("no head trained on {}", ex.dataset)))?;
            let ids = model
                .encoder
                .token_ids(&ex.text)
                .map_err(|_| Error::EmptyInput(format!("training example {i} has no tokens")))?;
            Ok(Prepared {
                ids,
                head,
                label: ex.label,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Gradients {
    rows: BTreeMap<usize, Vec<f64>>,
    attention: Vec<f64>,
    head_weights: [Vec<f64>; 3],
    head_bias: [[f64; 3]; 3],
}

impl Gradients {
    fn zeros(dim: usize) -> Self {
        Self {
            rows: BTreeMap::new(),
            attention: vec![0.0; dim],
            head_weights: std::array::from_fn(|_| vec![0.0; 3 * dim]),
            head_bias: [[0.0; 3]; 3],
        }
    }
}

/// Forward pass for one example; returns its loss and, if `grads` is given,
/// adds `scale` times its gradient.
fn example_pass(model: &SentimentModel, ex: &Prepared, scale: f64, grads: Option<&mut Gradients>) -> f64 {
    let d = model.dim();
    let enc = &model.encoder;
    let w_att = &model.attention.w;
    let head = &model.heads[ex.head];

    let scores: Vec<f64> = ex.ids.iter().map(|&id| dot(w_att, enc.row(id))).collect();
    let attn = softmax(&scores);
    let mut pooled = vec![0.0; d];
    for (&id, &e) in ex.ids.iter().zip(&attn) {
        for (p, x) in pooled.iter_mut().zip(enc.row(id)) {
            *p += e * x;
        }
    }
    let logits = head.logits(&pooled);
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let y = ex.label.index();
    let loss = log_sum - logits[y];

    let Some(grads) = grads else {
        return loss;
    };

    // dL/dz = p - onehot(y)
    let mut dz = [0.0; 3];
    for k in 0..3 {
        dz[k] = (logits[k] - log_sum).exp() - if k == y { 1.0 } else { 0.0 };
    }
    let mut d_pooled = vec![0.0; d];
    for k in 0..3 {
        grads.head_bias[ex.head][k] += scale * dz[k];
        let w_row = &head.weights[k * d..(k + 1) * d];
        let g_row = &mut grads.head_weights[ex.head][k * d..(k + 1) * d];
        for j in 0..d {
            g_row[j] += scale * dz[k] * pooled[j];
            d_pooled[j] += dz[k] * w_row[j];
        }
    }

    // Through the softmax over attention scores.
    let d_attn: Vec<f64> = ex.ids.iter().map(|&id| dot(&d_pooled, enc.row(id))).collect();
    let mean = dot(&attn, &d_attn);
    for (t, &id) in ex.ids.iter().enumerate() {
        let d_score = attn[t] * (d_attn[t] - mean);
        let h = enc.row(id);
        for j in 0..d {
            grads.attention[j] += scale * d_score * h[j];
        }
        let row = grads.rows.entry(id).or_insert_with(|| vec![0.0; d]);
        for j in 0..d {
            row[j] += scale * (attn[t] * d_pooled[j] + d_score * w_att[j]);
        }
    }
    loss
}

fn batch_gradients(model: &SentimentModel, batch: &[&Prepared]) -> (f64, Gradients) {
    let scale = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros(model.dim());
    let loss: f64 = batch
        .iter()
        .map(|ex| example_pass(model, ex, scale, Some(&mut grads)))
        .sum();
    (loss * scale, grads)
}

fn batch_loss(model: &SentimentModel, batch: &[Prepared]) -> f64 {
    batch.iter().map(|ex| example_pass(model, ex, 0.0, None)).sum::<f64>() / batch.len() as f64
}

fn apply(model: &mut SentimentModel, grads: &Gradients, lr: f64) {
    let d = model.dim();
    for (&id, g) in &grads.rows {
        for (w, gj) in model.encoder.table[id * d..(id + 1) * d].iter_mut().zip(g) {
            *w -= lr * gj;
        }
    }
    for (w, g) in model.attention.w.iter_mut().zip(&grads.attention) {
        *w -= lr * g;
    }
    for (h, head) in model.heads.iter_mut().enumerate() {
        for (w, g) in head.weights.iter_mut().zip(&grads.head_weights[h]) {
            *w -= lr * g;
        }
        for k in 0..3 {
            head.bias[k] -= lr * grads.head_bias[h][k];
        }
    }
}

fn head_label(model: &SentimentModel, ex: &Prepared) -> SentimentLabel {
    let tokens = model.encoder.encode_ids(&ex.ids).expect("prepared ids are valid");
    let pooled = super::pooling::attention_pool(&tokens, &model.attention).expect("dimensions agree");
    let probs = super::pooling::head_scores(&pooled.vector, &model.heads[ex.head]).expect("dimensions agree");
    argmax_label(&probs)
}

fn ensemble_label(model: &SentimentModel, ex: &Prepared) -> SentimentLabel {
    let tokens = model.encoder.encode_ids(&ex.ids).expect("prepared ids are valid");
    let pooled = super::pooling::attention_pool(&tokens, &model.attention).expect("dimensions agree");
    let labels = model.heads.each_ref().map(|head| {
        argmax_label(&super::pooling::head_scores(&pooled.vector, head).expect("dimensions agree"))
    });
    majority_vote(&labels).expect("three labels")
}

fn accuracy<'a>(examples: impl Iterator<Item = &'a Prepared>, predict: impl Fn(&Prepared) -> SentimentLabel) -> f64 {
    let (hits, total) = examples.fold((0usize, 0usize), |(h, n), ex| (h + usize::from(predict(ex) == ex.label), n + 1));
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Trains every head on its own dataset's examples, sharing the encoder and
/// attention vector. Each epoch visits heads in order, each over a seeded
/// shuffle of its examples, one gradient step per mini-batch.
pub fn train(
    model: &mut SentimentModel<HashedEncoder>,
    examples: &[LabeledExample],
    params: &TrainParams,
) -> Result<TrainTrace> {
    if !(params.lr.is_finite() && params.lr > 0.0) {
        return Err(Error::argument(format!("learning rate must be positive, got {}", params.lr)));
    }
    if params.batch_size == 0 || params.epochs == 0 {
        return Err(Error::argument("batch size and epochs must be at least 1"));
    }
    let prepared = prepare(model, examples)?;
    let per_head: [Vec<&Prepared>; 3] =
        std::array::from_fn(|h| prepared.iter().filter(|ex| ex.head == h).collect());
    for (h, group) in per_head.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::argument(format!(
                "head {h} ({}) has no training examples",
                model.heads[h].dataset
            )));
        }
    }

    let mut trace = TrainTrace::default();
    for epoch in 1..=params.epochs {
        let mut losses = [0.0; 3];
        for (h, group) in per_head.iter().enumerate() {
            let mut order = group.clone();
            let mut rng = SplitMix64::new(derive_seed(params.seed, (epoch * 3 + h) as u64));
            for i in (1..order.len()).rev() {
                order.swap(i, rng.below(i as u64 + 1) as usize);
            }
            let mut weighted = 0.0;
            for batch in order.chunks(params.batch_size) {
                let (loss, grads) = batch_gradients(model, batch);
                weighted += loss * batch.len() as f64;
                apply(model, &grads, params.lr);
            }
            losses[h] = weighted / order.len() as f64;
        }
        let heads = std::array::from_fn(|h| HeadEpoch {
            loss: losses[h],
            accuracy: accuracy(per_head[h].iter().copied(), |ex| head_label(model, ex)),
        });
        trace.epochs.push(EpochStats {
            epoch,
            heads,
            ensemble_accuracy: accuracy(prepared.iter(), |ex| ensemble_label(model, ex)),
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckReport {
    /// max over parameters of |analytic - numeric| / max(|analytic| + |numeric|, 1e-8)
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub parameters_checked: usize,
}

const REL_ERROR_FLOOR: f64 = 1e-8;

/// Compares analytic gradients of the mean batch cross-entropy against
/// central differences with the given step, over the attention vector, every
/// head weight and bias, and every embedding row the batch touches.
pub fn grad_check(model: &SentimentModel<HashedEncoder>, batch: &[LabeledExample], step: f64) -> Result<GradCheckReport> {
    if batch.is_empty() {
        return Err(Error::argument("gradient check needs a non-empty batch"));
    }
    let prepared = prepare(model, batch)?;
    let refs: Vec<&Prepared> = prepared.iter().collect();
    let (_, analytic) = batch_gradients(model, &refs);

    let d = model.dim();
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        parameters_checked: 0,
    };
    let mut check = |probe: &mut SentimentModel, get: &dyn Fn(&mut SentimentModel) -> &mut f64, a: f64| {
        let orig = *get(probe);
        *get(probe) = orig + step;
        let up = batch_loss(probe, &prepared);
        *get(probe) = orig - step;
        let down = batch_loss(probe, &prepared);
        *get(probe) = orig;
        let numeric = (up - down) / (2.0 * step);
        let abs = (a - numeric).abs();
        let rel = abs / (a.abs() + numeric.abs()).max(REL_ERROR_FLOOR);
        report.max_abs_error = report.max_abs_error.max(abs);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.parameters_checked += 1;
    };

    for j in 0..d {
        check(&mut probe, &|m| &mut m.attention.w[j], analytic.attention[j]);
    }
    for h in 0..3 {
        for i in 0..3 * d {
            check(&mut probe, &|m| &mut m.heads[h].weights[i], analytic.head_weights[h][i]);
        }
        for k in 0..3 {
            check(&mut probe, &|m| &mut m.heads[h].bias[k], analytic.head_bias[h][k]);
        }
    }
    for (&id, g) in &analytic.rows {
        for j in 0..d {
            check(&mut probe, &|m| &mut m.encoder.table[id * d + j], g[j]);
        }
    }
    Ok(report)
}
