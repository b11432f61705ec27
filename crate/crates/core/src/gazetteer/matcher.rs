use std::ops::Range;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::Serialize;

use super::lexicon::{LocationKind, Lexicon};
use super::normalize::normalize_text;
use crate::country::CountryCode;
use crate::error::{Error, Result};

/// One country attribution for one place-name occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocationTag {
    pub country: CountryCode,
    /// Byte span in the normalized text.
    pub span: Range<usize>,
    /// The same span mapped back onto the input text.
    pub original_span: Range<usize>,
    pub matched_surface: String,
    pub kind: LocationKind,
}

/// Compiled gazetteer. Immutable; share it freely across threads.
#[derive(Debug, Clone)]
pub struct Matcher {
    automaton: AhoCorasick,
    surfaces: Vec<String>,
    /// Per pattern: one (country, kind) per owning country, sorted by
    /// country, with the highest-priority kind when a country holds the
    /// surface more than once.
    payloads: Vec<Vec<(CountryCode, LocationKind)>>,
}

pub fn compile_matcher(lexicon: &Lexicon) -> Result<Matcher> {
    if lexicon.is_empty() {
        return Err(Error::argument("cannot compile a matcher from an empty lexicon"));
    }
    let mut surfaces: Vec<String> = Vec::new();
    let mut payloads: Vec<Vec<(CountryCode, LocationKind)>> = Vec::new();
    // Entries iterate sorted by (surface, country, kind), so equal surfaces
    // are adjacent and the first kind seen per country has top priority.
    for entry in lexicon.entries() {
        if surfaces.last() != Some(&entry.surface) {
            surfaces.push(entry.surface.clone());
            payloads.push(Vec::new());
        }
        let owners = payloads.last_mut().expect("pushed above");
        if owners.last().map(|(c, _)| *c) != Some(entry.country) {
            owners.push((entry.country, entry.kind));
        }
    }
    let automaton = AhoCorasickBuilder::new()
        .match_kind(MatchKind::Standard)
        .build(&surfaces)
        .map_err(|e| Error::argument(format!("matcher compilation failed: {e}")))?;
    Ok(Matcher {
        automaton,
        surfaces,
        payloads,
    })
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn at_boundary(text: &str, span: &Range<usize>) -> bool {
    let before = text[..span.start].chars().next_back();
    let after = text[span.end..].chars().next();
    before.is_none_or(|c| !is_word_char(c)) && after.is_none_or(|c| !is_word_char(c))
}

impl Matcher {
    pub fn pattern_count(&self) -> usize {
        self.surfaces.len()
    }

    /// Leftmost-longest, non-overlapping, token-bounded matches over
    /// already-normalized text: `(span, pattern index)` pairs.
    pub fn find_spans(&self, normalized: &str) -> Vec<(Range<usize>, usize)> {
        let mut candidates: Vec<(Range<usize>, usize)> = self
            .automaton
            .find_overlapping_iter(normalized)
            .map(|m| (m.range(), m.pattern().as_usize()))
            .filter(|(span, _)| at_boundary(normalized, span))
            .collect();
        candidates.sort_by(|a, b| a.0.start.cmp(&b.0.start).then(b.0.end.cmp(&a.0.end)));

        let mut chosen = Vec::new();
        let mut cursor = 0;
        for (span, pattern) in candidates {
            if span.start >= cursor {
                cursor = span.end;
                chosen.push((span, pattern));
            }
        }
        chosen
    }

    pub fn tag(&self, text: &str) -> Vec<LocationTag> {
        let normalized = normalize_text(text);
        let mut tags = Vec::new();
        for (span, pattern) in self.find_spans(&normalized.text) {
            let original_span = normalized.original_span(span.clone());
            for &(country, kind) in &self.payloads[pattern] {
                tags.push(LocationTag {
                    country,
                    span: span.clone(),
                    original_span: original_span.clone(),
                    matched_surface: self.surfaces[pattern].clone(),
                    kind,
                });
            }
        }
        tags
    }
}

/// Tags every country mentioned in `text`. Ambiguous surfaces yield one tag
/// per owning country, all sharing the span.
pub fn tag_locations(matcher: &Matcher, text: &str) -> Vec<LocationTag> {
    matcher.tag(text)
}
