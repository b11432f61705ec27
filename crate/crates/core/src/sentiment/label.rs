use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class order matches classifier-head output rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [Self::Negative, Self::Neutral, Self::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training corpora, one per classifier head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    /// Stanford Sentiment Treebank, 5-class.
    #[serde(rename = "sst")]
    Sst,
    /// SemEval-2015 Task 10, message polarity.
    #[serde(rename = "semeval15-t10")]
    SemEval15T10,
    /// SemEval-2015 Task 11, figurative language, scores in [-5, 5].
    #[serde(rename = "semeval15-t11")]
    SemEval15T11,
}

impl DatasetId {
    pub const ALL: [DatasetId; 3] = [Self::Sst, Self::SemEval15T10, Self::SemEval15T11];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sst => "sst",
            Self::SemEval15T10 => "semeval15-t10",
            Self::SemEval15T11 => "semeval15-t11",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s.trim())
            .ok_or_else(|| Error::format(format!("unknown dataset {s:?}")))
    }
}

/// Maps a dataset-native label onto the three shared classes.
pub fn harmonize_labels(raw: &str, dataset: DatasetId) -> Result<SentimentLabel> {
    let raw = raw.trim();
    let bad = || Error::format(format!("label {raw:?} is out of range for {dataset}"));
    match dataset {
        DatasetId::Sst => match raw.parse::<u8>().map_err(|_| bad())? {
            0 | 1 => Ok(SentimentLabel::Negative),
            2 => Ok(SentimentLabel::Neutral),
            3 | 4 => Ok(SentimentLabel::Positive),
            _ => Err(bad()),
        },
        DatasetId::SemEval15T10 => match raw.to_ascii_lowercase().as_str() {
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" | "objective" | "objective-or-neutral" => Ok(SentimentLabel::Neutral),
            "positive" => Ok(SentimentLabel::Positive),
            _ => Err(bad()),
        },
        DatasetId::SemEval15T11 => {
            let score: f64 = raw.parse().map_err(|_| bad())?;
            if !(-5.0..=5.0).contains(&score) {
                return Err(bad());
            }
            Ok(if score < 0.0 {
                SentimentLabel::Negative
            } else if score > 0.0 {
                SentimentLabel::Positive
            } else {
                SentimentLabel::Neutral
            })
        }
    }
}

/// Two-of-three wins; three distinct labels resolve to Neutral.
pub fn majority_vote(labels: &[SentimentLabel]) -> Result<SentimentLabel> {
    let [a, b, c] = labels else {
        return Err(Error::argument(format!("majority vote needs exactly 3 labels, got {}", labels.len())));
    };
    Ok(if a == b || a == c {
        *a
    } else if b == c {
        *b
    } else {
        SentimentLabel::Neutral
    })
}

/// Arg-max over class probabilities. Exact ties resolve in the order
/// Neutral, Negative, Positive.
pub fn argmax_label(probs: &[f64; 3]) -> SentimentLabel {
    const PRIORITY: [SentimentLabel; 3] = [SentimentLabel::Neutral, SentimentLabel::Negative, SentimentLabel::Positive];
    let mut best = PRIORITY[0];
    for label in &PRIORITY[1..] {
        if probs[label.index()] > probs[best.index()] {
            best = *label;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    #[test]
    fn vote_examples() {
        assert_eq!(majority_vote(&[Negative, Negative, Negative]).unwrap(), Negative);
        assert_eq!(majority_vote(&[Neutral, Positive, Positive]).unwrap(), Positive);
        assert_eq!(majority_vote(&[Positive, Positive, Negative]).unwrap(), Positive);
        assert_eq!(majority_vote(&[Positive, Negative, Neutral]).unwrap(), Neutral);
        assert!(matches!(majority_vote(&[Positive, Negative]), Err(Error::Argument(_))));
        assert!(majority_vote(&[Positive; 4]).is_err());
    }

    #[test]
    fn vote_matches_truth_table() {
        // Brute force: count occurrences, pick any label seen >= 2 times.
        for a in SentimentLabel::ALL {
            for b in SentimentLabel::ALL {
                for c in SentimentLabel::ALL {
                    let triple = [a, b, c];
                    let expected = SentimentLabel::ALL
                        .into_iter()
                        .find(|l| triple.iter().filter(|x| *x == l).count() >= 2)
                        .unwrap_or(Neutral);
                    assert_eq!(majority_vote(&triple).unwrap(), expected, "{triple:?}");
                    for perm in [[a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                        assert_eq!(majority_vote(&perm).unwrap(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn harmonization() {
        assert_eq!(harmonize_labels("4", DatasetId::Sst).unwrap(), Positive);
        assert_eq!(harmonize_labels("1", DatasetId::Sst).unwrap(), Negative);
        assert_eq!(harmonize_labels("2", DatasetId::Sst).unwrap(), Neutral);
        assert_eq!(harmonize_labels("-3", DatasetId::SemEval15T11).unwrap(), Negative);
        assert_eq!(harmonize_labels("0", DatasetId::SemEval15T11).unwrap(), Neutral);
        assert_eq!(harmonize_labels("2.5", DatasetId::SemEval15T11).unwrap(), Positive);
        assert_eq!(harmonize_labels("Positive", DatasetId::SemEval15T10).unwrap(), Positive);
        assert_eq!(harmonize_labels("objective-OR-neutral", DatasetId::SemEval15T10).unwrap(), Neutral);
        assert!(matches!(harmonize_labels("5", DatasetId::Sst), Err(Error::Format(_))));
        assert!(harmonize_labels("6", DatasetId::SemEval15T11).is_err());
        assert!(harmonize_labels("meh", DatasetId::SemEval15T10).is_err());
        assert!(matches!("imdb".parse::<DatasetId>(), Err(Error::Format(_))));
    }

    #[test]
    fn argmax_tie_order() {
        assert_eq!(argmax_label(&[1.0 / 3.0; 3]), Neutral);
        assert_eq!(argmax_label(&[0.4, 0.2, 0.4]), Negative);
        assert_eq!(argmax_label(&[0.1, 0.2, 0.7]), Positive);
        assert_eq!(argmax_label(&[0.3, 0.4, 0.3]), Neutral);
    }
}
