//! Weekly per-country aggregation, case-window sums, Pearson correlation
//! and lead-lag sweeps, and the plot-ready CSV report.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use serde::Serialize;

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::{CaseSeries, TweetRecord};
use crate::sentiment::SentimentLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoredTweet {
    pub record: TweetRecord,
    pub countries: BTreeSet<CountryCode>,
    pub label: SentimentLabel,
}

/// A country, or the whole corpus. Countries sort before `Global`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Country(CountryCode),
    Global,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Country(c) => c.fmt(f),
            Region::Global => f.write_str("GLOBAL"),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeeklyBucket {
    pub week: NaiveDate,
    pub region: Region,
    pub n_total: u64,
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_neutral: u64,
}

impl WeeklyBucket {
    fn empty(week: NaiveDate, region: Region) -> Self {
        Self {
            week,
            region,
            n_total: 0,
            n_pos: 0,
            n_neg: 0,
            n_neutral: 0,
        }
    }

    fn add(&mut self, label: SentimentLabel) {
        self.n_total += 1;
        match label {
            SentimentLabel::Positive => self.n_pos += 1,
            SentimentLabel::Negative => self.n_neg += 1,
            SentimentLabel::Neutral => self.n_neutral += 1,
        }
    }
}

/// One bucket per (region, week), zero-filled, sorted by (region, week).
/// A tweet counts once toward GLOBAL and once toward each tagged country.
pub fn aggregate_weekly(tweets: &[ScoredTweet], weeks: &[NaiveDate], countries: &[CountryCode]) -> Result<Vec<WeeklyBucket>> {
    let week_index: HashMap<NaiveDate, usize> = weeks.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let regions: BTreeSet<Region> = countries
        .iter()
        .map(|c| Region::Country(*c))
        .chain([Region::Global])
        .collect();
    let mut table: BTreeMap<Region, Vec<WeeklyBucket>> = regions
        .iter()
        .map(|r| (*r, weeks.iter().map(|w| WeeklyBucket::empty(*w, *r)).collect()))
        .collect();

    for tweet in tweets {
        let &w = week_index.get(&tweet.record.date()).ok_or_else(|| {
            Error::argument(format!("tweet {} dated {} is outside the configured weeks", tweet.record.id, tweet.record.date()))
        })?;
        table.get_mut(&Region::Global).expect("global present")[w].add(tweet.label);
        for country in &tweet.countries {
            let series = table.get_mut(&Region::Country(*country)).ok_or_else(|| {
                Error::argument(format!("tweet {} is tagged with unconfigured country {country}", tweet.record.id))
            })?;
            series[w].add(tweet.label);
        }
    }
    Ok(table.into_values().flatten().collect())
}

/// Trailing 7-day case sums ending on each week date (inclusive).
pub fn weekly_cases(series: &CaseSeries, weeks: &[NaiveDate]) -> Result<Vec<u64>> {
    let mut missing = Vec::new();
    let sums = weeks
        .iter()
        .map(|&w| {
            (0..7u64)
                .map(|back| {
                    let day = w - Days::new(back);
                    series.get(day).unwrap_or_else(|| {
                        missing.push(day);
                        0
                    })
                })
                .sum()
        })
        .collect();
    if missing.is_empty() {
        return Ok(sums);
    }
    missing.sort();
    missing.dedup();
    let list: Vec<String> = missing.iter().map(NaiveDate::to_string).collect();
    Err(Error::argument(format!(
        "case series for {} does not cover {}",
        series.country,
        list.join(", ")
    )))
}

/// Sample Pearson correlation. Constant input is `NotComputable`, never 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::argument(format!("need at least 3 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::NotComputable("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagCorrelation {
    /// Positive lag: the first (tweet) series leads the second (case) series.
    pub lag: i64,
    /// `None` when either side is constant over the overlap.
    pub r: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub region: Region,
    pub series_pair: (String, String),
    pub lags: Vec<LagCorrelation>,
    pub best_lag: Option<i64>,
}

/// Correlates `x[t]` with `y[t + k]` for every `k` in `[-max_lag, max_lag]`.
/// Lags whose overlap is shorter than 3 are omitted; `best_lag` maximises r,
/// preferring lag 0, then smaller |k|, then positive k.
pub fn lagged_xcorr(x: &[f64], y: &[f64], max_lag: usize) -> Result<Vec<LagCorrelation>> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    let len = x.len() as i64;
    let max_lag = max_lag as i64;
    let mut out = Vec::new();
    for k in -max_lag..=max_lag {
        let start = 0.max(-k);
        let end = len.min(len - k);
        if end - start < 3 {
            continue;
        }
        let xs = &x[start as usize..end as usize];
        let ys = &y[(start + k) as usize..(end + k) as usize];
        let r = match pearson(xs, ys) {
            Ok(r) => Some(r),
            Err(Error::NotComputable(_)) => None,
            Err(e) => return Err(e),
        };
        out.push(LagCorrelation {
            lag: k,
            r,
            n: xs.len(),
        });
    }
    if out.is_empty() {
        return Err(Error::argument(format!(
            "series of length {len} leave no lag in ±{max_lag} with 3 overlapping points"
        )));
    }
    Ok(out)
}

pub fn best_lag(lags: &[LagCorrelation]) -> Option<i64> {
    let rank = |l: &LagCorrelation| (l.lag != 0, l.lag.unsigned_abs(), l.lag < 0);
    lags.iter()
        .filter_map(|l| l.r.map(|r| (r, l)))
        .fold(None::<(f64, &LagCorrelation)>, |best, (r, l)| match best {
            Some((br, bl)) if br > r || (br == r && rank(bl) <= rank(l)) => Some((br, bl)),
            _ => Some((r, l)),
        })
        .map(|(_, l)| l.lag)
}

impl CorrelationReport {
    pub fn compute(region: Region, pair: (&str, &str), x: &[f64], y: &[f64], max_lag: usize) -> Result<Self> {
        let lags = lagged_xcorr(x, y, max_lag)?;
        Ok(Self {
            region,
            series_pair: (pair.0.to_string(), pair.1.to_string()),
            best_lag: best_lag(&lags),
            lags,
        })
    }
}

pub const NOT_COMPUTABLE: &str = "NOT-COMPUTABLE";

#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub country_files: Vec<PathBuf>,
    pub global_file: PathBuf,
    pub correlation_file: PathBuf,
}

fn series_rows(
    path: &Path,
    buckets: &[&WeeklyBucket],
    cases: Option<&Vec<u64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(format!("writing {}", path.display()), e.into()))?;
    w.write_record(["week", "n_total", "n_pos", "n_neg", "n_neutral", "weekly_cases"])?;
    for (i, b) in buckets.iter().enumerate() {
        let cases = cases.map(|c| c[i].to_string()).unwrap_or_default();
        w.write_record([
            b.week.to_string(),
            b.n_total.to_string(),
            b.n_pos.to_string(),
            b.n_neg.to_string(),
            b.n_neutral.to_string(),
            cases,
        ])?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

/// Writes one row per (region, lag); unavailable coefficients are written
/// as [`NOT_COMPUTABLE`].
pub fn write_correlations(path: &Path, correlations: &[CorrelationReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(format!("writing {}", path.display()), e.into()))?;
    w.write_record(["country", "series_x", "series_y", "lag", "r", "n", "best_lag"])?;
    let mut sorted: Vec<&CorrelationReport> = correlations.iter().collect();
    sorted.sort_by_key(|c| c.region);
    for report in sorted {
        for lag in &report.lags {
            w.write_record([
                report.region.to_string(),
                report.series_pair.0.clone(),
                report.series_pair.1.clone(),
                lag.lag.to_string(),
                lag.r.map_or_else(|| NOT_COMPUTABLE.to_string(), |r| r.to_string()),
                lag.n.to_string(),
                (report.best_lag == Some(lag.lag)).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

/// Writes `countries/<CODE>.csv`, `global.csv` and `correlations.csv` under
/// `destination`. Row order is fixed (region, then week or lag).
pub fn emit_report(
    buckets: &[WeeklyBucket],
    cases: &BTreeMap<Region, Vec<u64>>,
    correlations: &[CorrelationReport],
    destination: &Path,
) -> Result<ReportFiles> {
    let country_dir = destination.join("countries");
    fs::create_dir_all(&country_dir).map_err(|e| Error::io(format!("creating {}", country_dir.display()), e))?;

    let mut by_region: BTreeMap<Region, Vec<&WeeklyBucket>> = BTreeMap::new();
    for b in buckets {
        by_region.entry(b.region).or_default().push(b);
    }
    for series in by_region.values_mut() {
        series.sort_by_key(|b| b.week);
    }

    let mut country_files = Vec::new();
    let global_file = destination.join("global.csv");
    for (region, series) in &by_region {
        let case_col = cases.get(region).filter(|c| c.len() == series.len());
        let path = match region {
            Region::Global => global_file.clone(),
            Region::Country(c) => {
                let p = country_dir.join(format!("{c}.csv"));
                country_files.push(p.clone());
                p
            }
        };
        series_rows(&path, series, case_col)?;
    }
    if !by_region.contains_key(&Region::Global) {
        series_rows(&global_file, &[], None)?;
    }

    let correlation_file = destination.join("correlations.csv");
    write_correlations(&correlation_file, correlations)?;

    Ok(ReportFiles {
        country_files,
        global_file,
        correlation_file,
    })
}
