//! End-to-end runs: ingest -> tag -> score -> aggregate -> correlate.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::country::{self, CountryCode};
use crate::error::{Error, Result};
use crate::gazetteer::{build_lexicon, compile_matcher, Blocklist, GeonamesSources, Lexicon, LocationKind, Matcher};
use crate::ingest::{filter_keywords, read_tweets, sample_random, sample_tuesdays, CaseTable, KeywordSet, SkipTally, TweetRecord};
use crate::rng::derive_seed;
use crate::sentiment::{read_training_tsv, train, SentimentLabel, SentimentModel, TrainParams, TrainTrace};
use crate::trends::{aggregate_weekly, emit_report, weekly_cases, write_correlations, CorrelationReport, Region, ReportFiles, ScoredTweet, WeeklyBucket};

/// Every parameter of a run. Paths are optional here and checked by the
/// stage that needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tweets: Option<PathBuf>,
    pub geonames_dir: Option<PathBuf>,
    pub blocklist: Option<PathBuf>,
    /// Prebuilt lexicon TSV; when absent the lexicon is built from `geonames_dir`.
    pub lexicon: Option<PathBuf>,
    pub cases: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub training_data: Option<PathBuf>,
    pub output: PathBuf,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub keywords: Vec<String>,
    pub countries: Vec<CountryCode>,
    /// Overrides for the country names used in the case CSV.
    pub case_names: BTreeMap<CountryCode, String>,
    pub sample_size: usize,
    pub seed: u64,
    pub max_lag: usize,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dim: usize,
    pub table_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let p = TrainParams::default();
        Self {
            lr: p.lr,
            batch_size: p.batch_size,
            epochs: p.epochs,
            dim: 64,
            table_size: 1 << 16,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tweets: None,
            geonames_dir: None,
            blocklist: None,
            lexicon: None,
            cases: None,
            model: None,
            training_data: None,
            output: PathBuf::from("out"),
            start: NaiveDate::from_ymd_opt(2020, 3, 23).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2020, 6, 23).expect("valid date"),
            keywords: KeywordSet::default().keywords().to_vec(),
            countries: country::study_country_codes(),
            case_names: BTreeMap::new(),
            sample_size: 150_000,
            seed: 0,
            max_lag: 4,
            train: TrainConfig::default(),
        }
    }
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    let path = path
        .as_deref()
        .ok_or_else(|| Error::argument(format!("config key `{key}` is required for this command")))?;
    if !path.exists() {
        return Err(Error::io(
            format!("{key} {}", path.display()),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    Ok(path)
}

fn open(path: &Path, what: &str) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("opening {what} {}", path.display()), e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.start > self.end {
            return Err(Error::argument(format!("start {} is after end {}", self.start, self.end)));
        }
        if self.sample_size == 0 {
            return Err(Error::argument("sample_size must be at least 1"));
        }
        KeywordSet::new(self.keywords.iter().cloned())?;
        Ok(())
    }

    pub fn keyword_set(&self) -> Result<KeywordSet> {
        KeywordSet::new(self.keywords.iter().cloned())
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            lr: self.train.lr,
            batch_size: self.train.batch_size,
            epochs: self.train.epochs,
            seed: self.seed,
        }
    }

    pub fn case_name(&self, code: CountryCode) -> Result<String> {
        if let Some(name) = self.case_names.get(&code) {
            return Ok(name.clone());
        }
        country::lookup(code)
            .map(|c| c.case_series_name.to_string())
            .ok_or_else(|| Error::argument(format!("no case-series name for {code}; add it under [case_names]")))
    }

    pub fn lexicon_output_path(&self) -> PathBuf {
        self.lexicon.clone().unwrap_or_else(|| self.output.join("lexicon.tsv"))
    }
}

pub fn build_lexicon_from_config(cfg: &PipelineConfig) -> Result<Lexicon> {
    let dir = required(&cfg.geonames_dir, "geonames_dir")?;
    let blocklist = match &cfg.blocklist {
        Some(_) => Blocklist::load(required(&cfg.blocklist, "blocklist")?)?,
        None => Blocklist::default(),
    };
    build_lexicon(&GeonamesSources::in_dir(dir), &cfg.countries, &blocklist)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LexiconSummary {
    pub path: PathBuf,
    pub entries: usize,
    pub by_kind: BTreeMap<LocationKind, usize>,
}

/// Builds the lexicon from GeoNames dumps and writes it as TSV.
pub fn write_lexicon(cfg: &PipelineConfig) -> Result<LexiconSummary> {
    let lexicon = build_lexicon_from_config(cfg)?;
    let path = cfg.lexicon_output_path();
    lexicon.write_tsv(create(&path)?)?;
    Ok(LexiconSummary {
        path,
        entries: lexicon.len(),
        by_kind: lexicon.count_by_kind(),
    })
}

/// Loads the lexicon TSV if configured and present, otherwise builds it.
pub fn load_matcher(cfg: &PipelineConfig) -> Result<Matcher> {
    let lexicon = match &cfg.lexicon {
        Some(path) if path.exists() => Lexicon::read_tsv(open(path, "lexicon")?)?,
        _ => build_lexicon_from_config(cfg)?,
    };
    compile_matcher(&lexicon)
}

pub fn load_model(cfg: &PipelineConfig) -> Result<SentimentModel> {
    let path = required(&cfg.model, "model")?;
    SentimentModel::read_from(open(path, "model")?)
}

pub fn load_tweets(cfg: &PipelineConfig) -> Result<(Vec<TweetRecord>, SkipTally)> {
    let path = required(&cfg.tweets, "tweets")?;
    read_tweets(open(path, "tweets")?)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub trace_path: PathBuf,
    pub params: TrainParams,
    pub examples: usize,
    pub trace: TrainTrace,
}

/// Trains a fresh model from `training_data` and writes the model file and
/// a per-epoch loss/accuracy CSV.
pub fn train_model(cfg: &PipelineConfig) -> Result<TrainSummary> {
    let data_path = required(&cfg.training_data, "training_data")?;
    let model_path = cfg
        .model
        .clone()
        .ok_or_else(|| Error::argument("config key `model` is required for this command"))?;
    let examples = read_training_tsv(open(data_path, "training data")?)?;
    let params = cfg.train_params();
    let mut model = SentimentModel::new_random(cfg.train.dim, cfg.train.table_size, cfg.seed)?;
    let trace = train(&mut model, &examples, &params)?;

    model.write_to(create(&model_path)?)?;
    let trace_path = cfg.output.join("train_trace.csv");
    let mut out = create(&trace_path)?;
    writeln!(out, "epoch,head,dataset,loss,accuracy")?;
    for e in &trace.epochs {
        for (h, stats) in e.heads.iter().enumerate() {
            writeln!(out, "{},{h},{},{},{}", e.epoch, model.heads[h].dataset, stats.loss, stats.accuracy)?;
        }
        writeln!(out, "{},ensemble,all,,{}", e.epoch, e.ensemble_accuracy)?;
    }
    out.flush()?;
    Ok(TrainSummary {
        model_path,
        trace_path,
        params,
        examples: examples.len(),
        trace,
    })
}

#[derive(Debug, Clone, Serialize)]
struct TagRow<'a> {
    id: &'a str,
    countries: BTreeSet<CountryCode>,
    tags: Vec<crate::gazetteer::LocationTag>,
}

/// Tags every readable tweet and writes `tags.jsonl`. Returns the path, the
/// number of tweets with at least one country, and the skip tally.
pub fn tag_file(cfg: &PipelineConfig) -> Result<(PathBuf, usize, usize, SkipTally)> {
    let (records, tally) = load_tweets(cfg)?;
    let matcher = load_matcher(cfg)?;
    let rows: Vec<_> = records
        .par_iter()
        .map(|r| {
            let tags = matcher.tag(&r.text);
            TagRow {
                id: &r.id,
                countries: tags.iter().map(|t| t.country).collect(),
                tags,
            }
        })
        .collect();
    let path = cfg.output.join("tags.jsonl");
    let mut out = create(&path)?;
    for row in &rows {
        serde_json::to_writer(&mut out, row).map_err(|e| Error::io("writing tags", e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let tagged = rows.iter().filter(|r| !r.countries.is_empty()).count();
    Ok((path, records.len(), tagged, tally))
}

/// Scores every readable tweet and writes `scores.jsonl`.
pub fn score_file(cfg: &PipelineConfig) -> Result<(PathBuf, BTreeMap<SentimentLabel, u64>, SkipTally)> {
    let (records, tally) = load_tweets(cfg)?;
    let model = load_model(cfg)?;
    let scored: Vec<_> = records
        .par_iter()
        .map(|r| model.classify(&r.text).map(|c| (r, c)))
        .collect::<Result<_>>()?;
    let path = cfg.output.join("scores.jsonl");
    let mut out = create(&path)?;
    let mut totals = BTreeMap::new();
    for (record, c) in &scored {
        *totals.entry(c.label).or_insert(0) += 1;
        let row = serde_json::json!({ "id": record.id, "label": c.label, "per_head": c.per_head });
        serde_json::to_writer(&mut out, &row).map_err(|e| Error::io("writing scores", e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok((path, totals, tally))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub records_read: usize,
    pub skipped: u64,
    pub filtered: usize,
    pub on_tuesdays: usize,
    pub sampled: usize,
    pub tagged: usize,
    pub label_totals: BTreeMap<SentimentLabel, u64>,
    /// Regions whose series were too short for any lag.
    pub uncorrelated: Vec<String>,
    #[serde(skip)]
    pub files: Option<ReportFiles>,
    #[serde(skip)]
    pub buckets: Vec<WeeklyBucket>,
}

/// Filters, samples per Tuesday, tags and scores tweets, then aggregates
/// weekly series, aligns case counts and writes the report.
pub fn run(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let keywords = cfg.keyword_set()?;
    let cases_path = required(&cfg.cases, "cases")?;
    let case_table = CaseTable::from_reader(open(cases_path, "cases")?)?;
    let matcher = load_matcher(cfg)?;
    let model = load_model(cfg)?;
    let (records, tally) = load_tweets(cfg)?;
    let records_read = records.len();

    let filtered = filter_keywords(records, &keywords);
    let n_filtered = filtered.len();
    let by_week = sample_tuesdays(filtered, cfg.start, cfg.end)?;
    let weeks: Vec<NaiveDate> = by_week.keys().copied().collect();
    let on_tuesdays = by_week.values().map(Vec::len).sum();

    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
    let mut sampled = Vec::new();
    for (week, records) in by_week {
        let seed = derive_seed(cfg.seed, week.signed_duration_since(epoch).num_days() as u64);
        sampled.extend(sample_random(records, cfg.sample_size, seed)?);
    }

    let configured: BTreeSet<CountryCode> = cfg.countries.iter().copied().collect();
    let scored: Vec<ScoredTweet> = sampled
        .into_par_iter()
        .map(|record| {
            let countries = matcher
                .tag(&record.text)
                .into_iter()
                .map(|t| t.country)
                .filter(|c| configured.contains(c))
                .collect();
            let label = model.classify(&record.text)?.label;
            Ok(ScoredTweet { record, countries, label })
        })
        .collect::<Result<_>>()?;

    let mut label_totals = BTreeMap::new();
    for t in &scored {
        *label_totals.entry(t.label).or_insert(0) += 1;
    }
    let tagged = scored.iter().filter(|t| !t.countries.is_empty()).count();
    let buckets = aggregate_weekly(&scored, &weeks, &cfg.countries)?;

    let mut cases: BTreeMap<Region, Vec<u64>> = BTreeMap::new();
    for &code in &configured {
        let name = cfg.case_name(code)?;
        let series = case_table
            .series(&name)
            .ok_or_else(|| Error::format(format!("cases CSV: no rows for {name:?} ({code})")))?;
        cases.insert(Region::Country(code), weekly_cases(&series, &weeks)?);
    }
    cases.insert(Region::Global, weekly_cases(&case_table.global(), &weeks)?);

    let mut correlations = Vec::new();
    let mut uncorrelated = Vec::new();
    for (region, weekly) in &cases {
        let x: Vec<f64> = buckets
            .iter()
            .filter(|b| b.region == *region)
            .map(|b| b.n_total as f64)
            .collect();
        let y: Vec<f64> = weekly.iter().map(|&c| c as f64).collect();
        match CorrelationReport::compute(*region, ("n_total", "weekly_cases"), &x, &y, cfg.max_lag) {
            Ok(report) => correlations.push(report),
            Err(Error::Argument(_)) => uncorrelated.push(region.to_string()),
            Err(e) => return Err(e),
        }
    }

    let files = emit_report(&buckets, &cases, &correlations, &cfg.output)?;
    Ok(RunSummary {
        records_read,
        skipped: tally.malformed,
        filtered: n_filtered,
        on_tuesdays,
        sampled: scored.len(),
        tagged,
        label_totals,
        uncorrelated,
        files: Some(files),
        buckets,
    })
}

fn read_series_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_reader(open(path, "series")?);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(format!("{}: missing column {name}", path.display())))
    };
    let (total_col, cases_col) = (col("n_total")?, col("weekly_cases")?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let cell = |c: usize| -> Result<f64> {
            row.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| {
                Error::format(format!("{} row {}: column '{}' is not a number", path.display(), i + 2, &headers[c]))
            })
        };
        x.push(cell(total_col)?);
        y.push(cell(cases_col)?);
    }
    Ok((x, y))
}

/// Recomputes `correlations.csv` from the per-region CSVs of an earlier run.
pub fn correlate_dir(dir: &Path, max_lag: usize) -> Result<(PathBuf, Vec<String>)> {
    let mut inputs: Vec<(Region, PathBuf)> = Vec::new();
    let country_dir = dir.join("countries");
    let entries = fs::read_dir(&country_dir).map_err(|e| Error::io(format!("reading {}", country_dir.display()), e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io("listing countries", e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let code: CountryCode = stem
                .parse()
                .map_err(|_| Error::format(format!("{}: file name is not a country code", path.display())))?;
            inputs.push((Region::Country(code), path));
        }
    }
    inputs.push((Region::Global, dir.join("global.csv")));
    inputs.sort();

    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for (region, path) in inputs {
        let (x, y) = read_series_csv(&path)?;
        match CorrelationReport::compute(region, ("n_total", "weekly_cases"), &x, &y, max_lag) {
            Ok(r) => reports.push(r),
            Err(Error::Argument(_)) => skipped.push(region.to_string()),
            Err(e) => return Err(e),
        }
    }
    let out = dir.join("correlations.csv");
    write_correlations(&out, &reports)?;
    Ok((out, skipped))
}
