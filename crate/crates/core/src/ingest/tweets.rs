use std::io::BufRead;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One ingested post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

impl TweetRecord {
    pub fn new(id: impl Into<String>, timestamp: DateTime<Utc>, text: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if id.is_empty() {
            return Err(Error::argument("tweet id is empty"));
        }
        if text.is_empty() {
            return Err(Error::argument(format!("tweet {id} has empty text")));
        }
        let timestamp = timestamp.with_nanosecond(0).unwrap_or(timestamp);
        Ok(Self { id, timestamp, text })
    }

    /// Calendar date of the post in UTC.
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }
}

/// Lines that could not be turned into a [`TweetRecord`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipTally {
    pub malformed: u64,
}

#[derive(Deserialize)]
struct RawTweet {
    id: String,
    created_at: String,
    text: String,
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(ts) = DateTime::parse_from_rfc3339(s) {
        return Some(ts.with_timezone(&Utc));
    }
    // Offset-less timestamps are taken as UTC.
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .map(|naive| naive.and_utc())
}

fn parse_line(line: &[u8]) -> Option<TweetRecord> {
    let raw: RawTweet = serde_json::from_slice(line).ok()?;
    let timestamp = parse_timestamp(raw.created_at.trim())?;
    TweetRecord::new(raw.id, timestamp, raw.text).ok()
}

/// Streaming JSON Lines reader. Malformed lines are counted, never fatal;
/// blank lines are ignored without being counted.
pub struct TweetReader<R> {
    source: R,
    buf: Vec<u8>,
    tally: SkipTally,
}

impl<R: BufRead> TweetReader<R> {
    pub fn new(source: R) -> Self {
        Self {
            source,
            buf: Vec::new(),
            tally: SkipTally::default(),
        }
    }

    pub fn tally(&self) -> SkipTally {
        self.tally
    }
}

impl<R: BufRead> Iterator for TweetReader<R> {
    type Item = Result<TweetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.source.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io("reading tweets", e))),
            }
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            match parse_line(&self.buf) {
                Some(record) => return Some(Ok(record)),
                None => self.tally.malformed += 1,
            }
        }
    }
}

pub fn read_tweets<R: BufRead>(source: R) -> Result<(Vec<TweetRecord>, SkipTally)> {
    let mut reader = TweetReader::new(source);
    let records = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((records, reader.tally()))
}

/// Lower-case keywords matched as substrings of case-folded text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeywordSet {
    keywords: Vec<String>,
}

impl KeywordSet {
    pub fn new<I, S>(keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let keywords: Vec<String> = keywords.into_iter().map(Into::into).collect();
        if keywords.is_empty() {
            return Err(Error::argument("keyword set is empty"));
        }
        for (i, k) in keywords.iter().enumerate() {
            if k.is_empty() {
                return Err(Error::argument("empty keyword"));
            }
            if *k != k.to_lowercase() {
                return Err(Error::argument(format!("keyword {k:?} is not lowercase")));
            }
            if keywords[..i].contains(k) {
                return Err(Error::argument(format!("duplicate keyword {k:?}")));
            }
        }
        Ok(Self { keywords })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn matches(&self, text: &str) -> bool {
        let folded = text.to_lowercase();
        self.keywords.iter().any(|k| folded.contains(k.as_str()))
    }
}

impl Default for KeywordSet {
    /// The six collection keywords, case-folded.
    fn default() -> Self {
        Self::new(["corona", "coronavirus", "pandemic", "sarscov2", "covid", "covid19"])
            .expect("default keywords are valid")
    }
}

pub fn filter_keywords<I>(records: I, keywords: &KeywordSet) -> Vec<TweetRecord>
where
    I: IntoIterator<Item = TweetRecord>,
{
    records
        .into_iter()
        .filter(|r| keywords.matches(&r.text))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn rec(text: &str) -> TweetRecord {
        TweetRecord::new("1", Utc.with_ymd_and_hms(2020, 3, 24, 12, 0, 0).unwrap(), text).unwrap()
    }

    #[test]
    fn reads_clean_lines() {
        let input = br#"{"id":"1","created_at":"2020-03-24T10:00:00Z","text":"a"}
{"id":"2","created_at":"2020-03-24T11:00:00+00:00","text":"b","lang":"en"}
{"id":"3","created_at":"2020-03-24 12:00:00","text":"c"}
"#;
        let (records, tally) = read_tweets(&input[..]).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(tally.malformed, 0);
        assert_eq!(records[1].text, "b");
    }

    #[test]
    fn truncated_line_is_tallied() {
        let input = br#"{"id":"1","created_at":"2020-03-24T10:00:00Z","text":"a"}
{"id":"2","created_at":"2020-03-24T10:00:00Z","te
{"id":"3","created_at":"2020-03-24T10:00:00Z","text":"c"}"#;
        let (records, tally) = read_tweets(&input[..]).unwrap();
        assert_eq!(records.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["1", "3"]);
        assert_eq!(tally.malformed, 1);
    }

    #[test]
    fn empty_stream() {
        let (records, tally) = read_tweets(&b""[..]).unwrap();
        assert!(records.is_empty());
        assert_eq!(tally, SkipTally::default());
    }

    #[test]
    fn invalid_fields_are_tallied() {
        let input = br#"{"id":"","created_at":"2020-03-24T10:00:00Z","text":"a"}
{"id":"2","created_at":"yesterday","text":"a"}
{"id":"3","created_at":"2020-03-24T10:00:00Z","text":""}
{"id":4,"created_at":"2020-03-24T10:00:00Z","text":"a"}
[1,2,3]
"#;
        let (records, tally) = read_tweets(&input[..]).unwrap();
        assert!(records.is_empty());
        assert_eq!(tally.malformed, 5);
    }

    #[test]
    fn timestamps_truncate_to_seconds() {
        let input = br#"{"id":"1","created_at":"2020-03-24T10:00:00.750Z","text":"a"}"#;
        let (records, _) = read_tweets(&input[..]).unwrap();
        assert_eq!(records[0].timestamp, Utc.with_ymd_and_hms(2020, 3, 24, 10, 0, 0).unwrap());
    }

    #[test]
    fn keyword_filter_examples() {
        let ks = KeywordSet::default();
        let kept = filter_keywords(
            vec![rec("New SARSCoV2 variant found"), rec("flu season again"), rec("coronavirus")],
            &ks,
        );
        let texts: Vec<_> = kept.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts, ["New SARSCoV2 variant found", "coronavirus"]);
    }

    #[test]
    fn keyword_set_validation() {
        assert!(KeywordSet::new(Vec::<String>::new()).is_err());
        assert!(KeywordSet::new(["Covid"]).is_err());
        assert!(KeywordSet::new(["covid", "covid"]).is_err());
        assert_eq!(
            KeywordSet::default().keywords(),
            ["corona", "coronavirus", "pandemic", "sarscov2", "covid", "covid19"]
        );
    }
}
