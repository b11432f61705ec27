use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use tweetpulse::pipeline::{self, PipelineConfig};
use tweetpulse::Error;

/// Country tagging, sentiment scoring and weekly trend correlation.
#[derive(Debug, Parser)]
#[command(name = "tweetpulse", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags override the matching keys of the config file.
#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Tweet JSON-lines file.
    #[arg(long, global = true)]
    tweets: Option<PathBuf>,
    #[arg(long, global = true)]
    geonames_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    blocklist: Option<PathBuf>,
    /// Lexicon TSV (read by tag/run, written by build-lexicon).
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Cumulative confirmed-cases CSV (wide, one column per date).
    #[arg(long, global = true)]
    cases: Option<PathBuf>,
    /// Sentiment model file (read by score/run, written by train).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    training_data: Option<PathBuf>,
    #[arg(long, global = true)]
    start: Option<NaiveDate>,
    #[arg(long, global = true)]
    end: Option<NaiveDate>,
    /// Tweets sampled per Tuesday.
    #[arg(long, global = true)]
    sample_size: Option<usize>,
    #[arg(long, global = true)]
    max_lag: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the location lexicon from GeoNames dumps.
    BuildLexicon,
    /// Train the three-head sentiment model.
    Train,
    /// Tag tweets with countries (writes tags.jsonl).
    Tag,
    /// Score tweet sentiment (writes scores.jsonl).
    Score,
    /// Full pipeline: filter, sample, tag, score, aggregate, correlate.
    Run,
    /// Recompute correlations.csv from an earlier run's output directory.
    Correlate,
}

enum Failure {
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("reading config {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    set(&mut cfg.tweets, &common.tweets);
    set(&mut cfg.geonames_dir, &common.geonames_dir);
    set(&mut cfg.blocklist, &common.blocklist);
    set(&mut cfg.lexicon, &common.lexicon);
    set(&mut cfg.cases, &common.cases);
    set(&mut cfg.model, &common.model);
    set(&mut cfg.training_data, &common.training_data);
    if let Some(v) = &common.output {
        cfg.output.clone_from(v);
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.start {
        cfg.start = v;
    }
    if let Some(v) = common.end {
        cfg.end = v;
    }
    if let Some(v) = common.sample_size {
        cfg.sample_size = v;
    }
    if let Some(v) = common.max_lag {
        cfg.max_lag = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::BuildLexicon => {
            let s = pipeline::write_lexicon(&cfg)?;
            let kinds: Vec<String> = s.by_kind.iter().map(|(k, n)| format!("{k}={n}")).collect();
            eprintln!("lexicon: {} entries ({}) -> {}", s.entries, kinds.join(", "), show(&s.path));
        }
        Command::Train => {
            let s = pipeline::train_model(&cfg)?;
            eprintln!(
                "train: {} examples, lr={} batch={} epochs={} seed={}",
                s.examples, s.params.lr, s.params.batch_size, s.params.epochs, s.params.seed
            );
            if let Some(last) = s.trace.epochs.last() {
                let losses: Vec<String> = last.heads.iter().map(|h| format!("{:.4}", h.loss)).collect();
                eprintln!(
                    "final epoch: head losses [{}], ensemble accuracy {:.4}",
                    losses.join(", "),
                    last.ensemble_accuracy
                );
            }
            eprintln!("model -> {}, trace -> {}", show(&s.model_path), show(&s.trace_path));
        }
        Command::Tag => {
            let (path, n, tagged, tally) = pipeline::tag_file(&cfg)?;
            eprintln!("tag: {n} tweets read, {} malformed lines skipped, {tagged} tagged -> {}", tally.malformed, show(&path));
        }
        Command::Score => {
            let (path, totals, tally) = pipeline::score_file(&cfg)?;
            let parts: Vec<String> = totals.iter().map(|(l, n)| format!("{}={n}", l.as_str())).collect();
            eprintln!("score: {} malformed lines skipped; {} -> {}", tally.malformed, parts.join(", "), show(&path));
        }
        Command::Run => {
            let s = pipeline::run(&cfg)?;
            eprintln!("read {} tweets, skipped {} malformed lines", s.records_read, s.skipped);
            eprintln!(
                "{} matched keywords, {} on Tuesdays {}..{}, {} sampled (n={} per week, seed={})",
                s.filtered, s.on_tuesdays, cfg.start, cfg.end, s.sampled, cfg.sample_size, cfg.seed
            );
            let parts: Vec<String> = s.label_totals.iter().map(|(l, n)| format!("{}={n}", l.as_str())).collect();
            eprintln!("{} tagged with a country; sentiment {}", s.tagged, parts.join(", "));
            if !s.uncorrelated.is_empty() {
                eprintln!("too few weeks to correlate: {}", s.uncorrelated.join(", "));
            }
            eprintln!("report -> {}", show(&cfg.output));
        }
        Command::Correlate => {
            let (path, skipped) = pipeline::correlate_dir(&cfg.output, cfg.max_lag)?;
            if !skipped.is_empty() {
                eprintln!("too few weeks to correlate: {}", skipped.join(", "));
            }
            eprintln!("correlations (max lag {}) -> {}", cfg.max_lag, show(&path));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
