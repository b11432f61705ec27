use std::collections::BTreeMap;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::ingest::TweetRecord;
use crate::rng::SplitMix64;

/// Every Tuesday in `[start, end]`, ascending.
pub fn tuesdays_between(start: NaiveDate, end: NaiveDate) -> Result<Vec<NaiveDate>> {
    if start > end {
        return Err(Error::argument(format!("start {start} is after end {end}")));
    }
    let offset = (Weekday::Tue.num_days_from_monday() + 7 - start.weekday().num_days_from_monday()) % 7;
    let first = start + Days::new(offset.into());
    Ok(first
        .iter_weeks()
        .take_while(|d| *d <= end)
        .collect())
}

/// Buckets records by Tuesday. Non-Tuesday records and Tuesdays outside the
/// range are dropped; empty Tuesdays keep an empty list.
pub fn sample_tuesdays<I>(
    records: I,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<BTreeMap<NaiveDate, Vec<TweetRecord>>>
where
    I: IntoIterator<Item = TweetRecord>,
{
    let mut buckets: BTreeMap<NaiveDate, Vec<TweetRecord>> = tuesdays_between(start, end)?
        .into_iter()
        .map(|d| (d, Vec::new()))
        .collect();
    for record in records {
        if let Some(bucket) = buckets.get_mut(&record.date()) {
            bucket.push(record);
        }
    }
    Ok(buckets)
}

/// Uniform sample of `n` items without replacement, returned in input
/// order. A partial Fisher-Yates shuffle over indices drives the choice.
pub fn sample_random<T>(items: Vec<T>, n: usize, seed: u64) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::argument("sample size must be at least 1"));
    }
    if n >= items.len() {
        return Ok(items);
    }
    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = (0..items.len()).collect();
    for i in 0..n {
        let j = i + rng.below((items.len() - i) as u64) as usize;
        indices.swap(i, j);
    }
    let mut chosen = vec![false; items.len()];
    for &i in &indices[..n] {
        chosen[i] = true;
    }
    Ok(items
        .into_iter()
        .zip(chosen)
        .filter_map(|(item, keep)| keep.then_some(item))
        .collect())
}
