use std::ops::Range;

use unicode_normalization::char::{decompose_canonical, is_combining_mark};

/// Normalized text plus, for every output byte, the byte range of the
/// original character it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub text: String,
    origin: Vec<Range<usize>>,
}

impl Normalized {
    /// Maps a byte span of the normalized text back onto the original.
    pub fn original_span(&self, span: Range<usize>) -> Range<usize> {
        if span.is_empty() {
            let at = self.origin.get(span.start).map_or_else(
                || self.origin.last().map_or(0, |r| r.end),
                |r| r.start,
            );
            return at..at;
        }
        self.origin[span.start].start..self.origin[span.end - 1].end
    }
}

/// Letters with no canonical decomposition that still have an obvious
/// ASCII spelling.
fn ascii_fold(c: char) -> Option<&'static str> {
    Some(match c {
        'ø' => "o",
        'ł' => "l",
        'đ' | 'ð' => "d",
        'ħ' => "h",
        'ı' => "i",
        'æ' => "ae",
        'œ' => "oe",
        'ß' => "ss",
        'þ' => "th",
        '‘' | '’' | 'ʻ' | 'ʼ' => "'",
        '‐' | '‑' | '–' | '—' => "-",
        _ => return None,
    })
}

/// Case-folds, strips diacritics, removes `#`/`@` sigils and collapses
/// whitespace runs to one space (leading and trailing whitespace dropped).
pub fn normalize_text(text: &str) -> Normalized {
    let mut out = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut pending_space: Option<Range<usize>> = None;

    let push = |out: &mut String, origin: &mut Vec<Range<usize>>, c: char, src: Range<usize>| {
        let before = out.len();
        out.push(c);
        origin.extend(std::iter::repeat_n(src, out.len() - before));
    };

    for (pos, c) in text.char_indices() {
        let src = pos..pos + c.len_utf8();
        if c == '#' || c == '@' {
            continue;
        }
        if c.is_whitespace() {
            if !out.is_empty() && pending_space.is_none() {
                pending_space = Some(src);
            }
            continue;
        }
        if let Some(space) = pending_space.take() {
            push(&mut out, &mut origin, ' ', space);
        }
        for lower in c.to_lowercase() {
            if lower.is_ascii() {
                push(&mut out, &mut origin, lower, src.clone());
                continue;
            }
            decompose_canonical(lower, |part| {
                if is_combining_mark(part) {
                    return;
                }
                match ascii_fold(part) {
                    Some(folded) => folded
                        .chars()
                        .for_each(|f| push(&mut out, &mut origin, f, src.clone())),
                    None => push(&mut out, &mut origin, part, src.clone()),
                }
            });
        }
    }
    Normalized { text: out, origin }
}
