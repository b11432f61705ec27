use std::collections::BTreeMap;
use std::io::Read;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Daily new confirmed cases for one country over a contiguous date range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSeries {
    pub country: String,
    start: NaiveDate,
    daily_new_cases: Vec<u64>,
}

impl CaseSeries {
    pub fn new(country: impl Into<String>, start: NaiveDate, daily_new_cases: Vec<u64>) -> Self {
        Self {
            country: country.into(),
            start,
            daily_new_cases,
        }
    }

    /// Differences a cumulative series into daily counts. The first value is
    /// taken as-is; downward revisions clamp to zero.
    pub fn from_cumulative(country: impl Into<String>, start: NaiveDate, cumulative: &[u64]) -> Self {
        let mut prev = 0u64;
        let daily = cumulative
            .iter()
            .map(|&c| {
                let d = c.saturating_sub(prev);
                prev = c;
                d
            })
            .collect();
        Self::new(country, start, daily)
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn daily_new_cases(&self) -> &[u64] {
        &self.daily_new_cases
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.daily_new_cases.len() as u64).map(|i| self.start + Days::new(i))
    }

    pub fn get(&self, date: NaiveDate) -> Option<u64> {
        let offset = date.signed_duration_since(self.start).num_days();
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.daily_new_cases.get(i).copied())
    }
}

/// A wide-layout cumulative case table with sub-regions summed per country.
#[derive(Debug, Clone)]
pub struct CaseTable {
    start: NaiveDate,
    cumulative: BTreeMap<String, Vec<u64>>,
}

const COUNTRY_HEADERS: [&str; 3] = ["country/region", "country_region", "country"];

fn parse_header_date(cell: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(cell.trim(), "%m/%d/%y").ok()
}

impl CaseTable {
    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
        let headers = reader.headers()?.clone();

        let country_col = headers
            .iter()
            .position(|h| COUNTRY_HEADERS.contains(&h.trim().to_lowercase().as_str()))
            .ok_or_else(|| Error::format("cases CSV: no Country/Region column in header"))?;
        let first_date_col = headers
            .iter()
            .position(|h| parse_header_date(h).is_some())
            .ok_or_else(|| Error::format("cases CSV: missing date columns (expected M/D/YY headers)"))?;

        let mut dates = Vec::new();
        for (col, cell) in headers.iter().enumerate().skip(first_date_col) {
            let date = parse_header_date(cell).ok_or_else(|| {
                Error::format(format!("cases CSV header column {}: {cell:?} is not an M/D/YY date", col + 1))
            })?;
            if let Some(&prev) = dates.last() {
                if date != prev + Days::new(1) {
                    return Err(Error::format(format!(
                        "cases CSV header column {}: date {cell} does not follow {prev}",
                        col + 1
                    )));
                }
            }
            dates.push(date);
        }

        let mut cumulative: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for (row_idx, row) in reader.records().enumerate() {
            let row = row?;
            let line = row.position().map_or(row_idx as u64 + 2, |p| p.line());
            let country = row
                .get(country_col)
                .ok_or_else(|| Error::format(format!("cases CSV line {line}: missing country cell")))?
                .trim()
                .to_string();
            if row.len() != headers.len() {
                return Err(Error::format(format!(
                    "cases CSV line {line}: {} cells, header has {}",
                    row.len(),
                    headers.len()
                )));
            }
            let totals = cumulative
                .entry(country)
                .or_insert_with(|| vec![0; dates.len()]);
            for (i, cell) in row.iter().skip(first_date_col).enumerate() {
                let count: u64 = cell.trim().parse().map_err(|_| {
                    Error::format(format!(
                        "cases CSV line {line}, column '{}': unparseable count {cell:?}",
                        &headers[first_date_col + i]
                    ))
                })?;
                totals[i] += count;
            }
        }

        Ok(Self {
            start: dates[0],
            cumulative,
        })
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.cumulative.keys().map(String::as_str)
    }

    pub fn series(&self, country: &str) -> Option<CaseSeries> {
        self.cumulative
            .get(country)
            .map(|cum| CaseSeries::from_cumulative(country, self.start, cum))
    }

    /// All rows summed: the worldwide series.
    pub fn global(&self) -> CaseSeries {
        let len = self.cumulative.values().next().map_or(0, Vec::len);
        let mut total = vec![0u64; len];
        for cum in self.cumulative.values() {
            for (t, c) in total.iter_mut().zip(cum) {
                *t += c;
            }
        }
        CaseSeries::from_cumulative("GLOBAL", self.start, &total)
    }
}

/// Parses a wide cumulative-case CSV and returns daily series for the
/// requested countries. A requested country with no rows is a format error.
pub fn read_case_series<R: Read>(source: R, countries: &[&str]) -> Result<BTreeMap<String, CaseSeries>> {
    let table = CaseTable::from_reader(source)?;
    countries
        .iter()
        .map(|&c| {
            table
                .series(c)
                .map(|s| (c.to_string(), s))
                .ok_or_else(|| Error::format(format!("cases CSV: no rows for country {c:?}")))
        })
        .collect()
}
