//! Reading tweets and official case counts, keyword filtering, and the
//! weekly Tuesday sampling protocol.

mod cases;
mod sampling;
mod tweets;

pub use cases::{read_case_series, CaseSeries, CaseTable};
pub use sampling::{sample_random, sample_tuesdays, tuesdays_between};
pub use tweets::{filter_keywords, read_tweets, KeywordSet, SkipTally, TweetReader, TweetRecord};
