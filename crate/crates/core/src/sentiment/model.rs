use std::io::{BufRead, Read, Write};

use serde::Serialize;

use super::encoder::{HashedEncoder, TokenEncoder};
use super::label::{argmax_label, harmonize_labels, majority_vote, DatasetId, SentimentLabel};
use super::pooling::{attention_pool, head_scores, AttentionParams, ClassifierHead};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const MAGIC: &[u8; 8] = b"TPSMODEL";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub label: SentimentLabel,
    pub dataset: DatasetId,
}

/// Reads `dataset_id<TAB>raw_label<TAB>text` rows. A first row whose first
/// field is `dataset_id` is treated as a header.
pub fn read_training_tsv<R: BufRead>(source: R) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| Error::io("reading training data", e))?;
        if line.trim().is_empty() || (i == 0 && line.starts_with("dataset_id\t")) {
            continue;
        }
        let bad = |why: String| Error::format(format!("training TSV line {}: {why}", i + 1));
        let mut cols = line.splitn(3, '\t');
        let (Some(dataset), Some(raw), Some(text)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected dataset_id, raw_label, text".into()));
        };
        let dataset: DatasetId = dataset.parse().map_err(|e: Error| bad(e.to_string()))?;
        let label = harmonize_labels(raw, dataset).map_err(|e| bad(e.to_string()))?;
        out.push(LabeledExample {
            text: text.to_string(),
            label,
            dataset,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub per_head: [SentimentLabel; 3],
    pub label: SentimentLabel,
}

/// Encoder + attention + one classifier head per training dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentModel<E = HashedEncoder> {
    pub encoder: E,
    pub attention: AttentionParams,
    pub heads: [ClassifierHead; 3],
}

impl<E: TokenEncoder> SentimentModel<E> {
    pub fn from_parts(encoder: E, attention: AttentionParams, heads: [ClassifierHead; 3]) -> Result<Self> {
        let d = encoder.dim();
        if attention.w.len() != d || heads.iter().any(|h| h.weights.len() != 3 * d) {
            return Err(Error::argument(format!("all parameters must share encoder dimension {d}")));
        }
        Ok(Self {
            encoder,
            attention,
            heads,
        })
    }

    pub fn dim(&self) -> usize {
        self.encoder.dim()
    }

    pub fn head_index(&self, dataset: DatasetId) -> Option<usize> {
        self.heads.iter().position(|h| h.dataset == dataset)
    }

    /// Class probabilities from each head, in head order.
    pub fn probabilities(&self, text: &str) -> Result<[[f64; 3]; 3]> {
        let tokens = self.encoder.encode(text)?;
        let pooled = attention_pool(&tokens, &self.attention)?;
        let mut out = [[0.0; 3]; 3];
        for (slot, head) in out.iter_mut().zip(&self.heads) {
            *slot = head_scores(&pooled.vector, head)?;
        }
        Ok(out)
    }

    pub fn classify(&self, text: &str) -> Result<Classification> {
        let probs = self.probabilities(text)?;
        let per_head = probs.map(|p| argmax_label(&p));
        let label = majority_vote(&per_head)?;
        Ok(Classification { per_head, label })
    }
}

impl SentimentModel<HashedEncoder> {
    /// Fresh model with small random embeddings and head weights, zero
    /// attention vector and biases. Heads are ordered sst, t10, t11.
    pub fn new_random(dim: usize, table_size: usize, seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::new(seed);
        let encoder = HashedEncoder::random(dim, table_size, 0.1, &mut rng)?;
        let heads = DatasetId::ALL.map(|dataset| ClassifierHead {
            weights: (0..3 * dim).map(|_| rng.uniform(-0.1, 0.1)).collect(),
            bias: [0.0; 3],
            dataset,
        });
        Self::from_parts(encoder, AttentionParams { w: vec![0.0; dim] }, heads)
    }

    /// Binary layout, all integers and floats little-endian:
    /// magic `TPSMODEL`, u32 version, u64 d, u64 table size, table
    /// (size x d f64), w_att (d f64), then per head: u8 dataset code,
    /// weights (3d f64), bias (3 f64).
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dim();
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(d as u64).to_le_bytes())?;
        out.write_all(&(self.encoder.table_size() as u64).to_le_bytes())?;
        let put = |xs: &[f64], out: &mut W| -> Result<()> {
            for x in xs {
                out.write_all(&x.to_le_bytes())?;
            }
            Ok(())
        };
        put(self.encoder.table(), &mut out)?;
        put(&self.attention.w, &mut out)?;
        for head in &self.heads {
            out.write_all(&[head.dataset.code()])?;
            put(&head.weights, &mut out)?;
            put(&head.bias, &mut out)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut source: R) -> Result<Self> {
        let truncated = |e: std::io::Error| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::format("model file is truncated")
            } else {
                Error::io("reading model", e)
            }
        };
        let mut magic = [0u8; 8];
        source.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::format("not a tweetpulse model file"));
        }
        let mut word = [0u8; 4];
        source.read_exact(&mut word).map_err(truncated)?;
        let version = u32::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::format(format!("unsupported model format version {version}")));
        }
        let read_u64 = |source: &mut R| -> Result<u64> {
            let mut buf = [0u8; 8];
            source.read_exact(&mut buf).map_err(truncated)?;
            Ok(u64::from_le_bytes(buf))
        };
        let d = read_u64(&mut source)? as usize;
        let table_size = read_u64(&mut source)? as usize;
        if d == 0 || table_size == 0 || d.checked_mul(table_size).is_none_or(|n| n > 1 << 32) {
            return Err(Error::format(format!("implausible model shape d={d}, table={table_size}")));
        }
        let read_f64s = |source: &mut R, n: usize| -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; n * 8];
            source.read_exact(&mut bytes).map_err(truncated)?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect())
        };
        let encoder = HashedEncoder::from_table(d, table_size, read_f64s(&mut source, d * table_size)?)?;
        let attention = AttentionParams {
            w: read_f64s(&mut source, d)?,
        };
        let mut heads = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut code = [0u8; 1];
            source.read_exact(&mut code).map_err(truncated)?;
            let dataset =
                DatasetId::from_code(code[0]).ok_or_else(|| Error::format(format!("bad dataset code {}", code[0])))?;
            let weights = read_f64s(&mut source, 3 * d)?;
            let b = read_f64s(&mut source, 3)?;
            heads.push(ClassifierHead {
                weights,
                bias: [b[0], b[1], b[2]],
                dataset,
            });
        }
        let heads: [ClassifierHead; 3] = heads.try_into().expect("three heads read");
        Self::from_parts(encoder, attention, heads)
    }
}
