//! Sentiment scoring: token encoder, attention pooling, three dataset-
//! specific classifier heads and a majority vote over their labels.

mod encoder;
mod label;
mod model;
mod pooling;
mod train;

pub use encoder::{fnv1a64, tokenize, HashedEncoder, TokenEncoder, TokenMatrix};
pub use label::{argmax_label, harmonize_labels, majority_vote, DatasetId, SentimentLabel};
pub use model::{read_training_tsv, Classification, LabeledExample, SentimentModel};
pub use pooling::{attention_pool, head_scores, softmax, AttentionParams, ClassifierHead, Pooled};
pub use train::{grad_check, train, EpochStats, GradCheckReport, HeadEpoch, TrainParams, TrainTrace};
