use serde::{Deserialize, Serialize};

use super::encoder::TokenMatrix;
use super::label::DatasetId;
use crate::error::{Error, Result};

/// Numerically stable softmax (max-subtracted).
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The attention scoring vector `w_att`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    /// Text vector: attention-weighted sum of token rows.
    pub vector: Vec<f64>,
    /// Softmax attention weights, one per token.
    pub weights: Vec<f64>,
}

/// Scores each token with `w_att . h_t`, softmaxes the scores and returns
/// the weighted sum of token rows.
pub fn attention_pool(h: &TokenMatrix, att: &AttentionParams) -> Result<Pooled> {
    if att.w.len() != h.dim() {
        return Err(Error::argument(format!(
            "attention vector has dimension {}, tokens have {}",
            att.w.len(),
            h.dim()
        )));
    }
    let scores: Vec<f64> = h.iter_rows().map(|row| dot(&att.w, row)).collect();
    let weights = softmax(&scores);
    let mut vector = vec![0.0; h.dim()];
    for (row, &e) in h.iter_rows().zip(&weights) {
        for (v, x) in vector.iter_mut().zip(row) {
            *v += e * x;
        }
    }
    Ok(Pooled { vector, weights })
}

/// Linear layer + softmax over the three sentiment classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    /// 3 x d, row-major; row order Negative, Neutral, Positive.
    pub weights: Vec<f64>,
    pub bias: [f64; 3],
    pub dataset: DatasetId,
}

impl ClassifierHead {
    pub fn zeros(dim: usize, dataset: DatasetId) -> Self {
        Self {
            weights: vec![0.0; 3 * dim],
            bias: [0.0; 3],
            dataset,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len() / 3
    }

    pub(crate) fn logits(&self, pooled: &[f64]) -> [f64; 3] {
        let d = pooled.len();
        std::array::from_fn(|k| self.bias[k] + dot(&self.weights[k * d..(k + 1) * d], pooled))
    }
}

pub fn head_scores(pooled: &[f64], head: &ClassifierHead) -> Result<[f64; 3]> {
    if head.weights.len() != 3 * pooled.len() {
        return Err(Error::argument(format!(
            "head expects dimension {}, pooled vector has {}",
            head.dim(),
            pooled.len()
        )));
    }
    let probs = softmax(&head.logits(pooled));
    Ok([probs[0], probs[1], probs[2]])
}
