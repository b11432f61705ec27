//! Content-based location tagging: a country-attributed place-name lexicon
//! built from GeoNames dumps and a token-boundary multi-pattern matcher.

mod lexicon;
mod matcher;
mod normalize;

pub use lexicon::{build_lexicon, Blocklist, GeonamesSources, LocationEntry, LocationKind, Lexicon};
pub use matcher::{compile_matcher, tag_locations, LocationTag, Matcher};
pub use normalize::{normalize_text, Normalized};
