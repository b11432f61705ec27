use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::normalize::normalize_text;
use crate::country::CountryCode;
use crate::error::{Error, Result};

pub const LEXICON_FORMAT: &str = "# tweetpulse-lexicon v1";
const MIN_SURFACE_CHARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationKind {
    Country,
    Admin1,
    City,
}

impl LocationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocationKind::Country => "country",
            LocationKind::Admin1 => "admin1",
            LocationKind::City => "city",
        }
    }
}

impl fmt::Display for LocationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LocationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "country" => Ok(LocationKind::Country),
            "admin1" => Ok(LocationKind::Admin1),
            "city" => Ok(LocationKind::City),
            other => Err(Error::format(format!("unknown location kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationEntry {
    pub surface: String,
    pub country: CountryCode,
    pub kind: LocationKind,
}

/// Normalized words excluded from the lexicon.
#[derive(Debug, Clone, Default)]
pub struct Blocklist(BTreeSet<String>);

impl Blocklist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            words
                .into_iter()
                .map(|w| normalize_text(w.as_ref()).text)
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// Newline-delimited words; blank lines and `#` comments are ignored.
    pub fn from_reader<R: BufRead>(source: R) -> Result<Self> {
        let mut words = Vec::new();
        for line in source.lines() {
            let line = line.map_err(|e| Error::io("reading blocklist", e))?;
            let word = line.trim();
            if !word.is_empty() && !word.starts_with('#') {
                words.push(word.to_string());
            }
        }
        Ok(Self::new(words))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(format!("opening blocklist {}", path.display()), e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.0.contains(surface)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Paths of the three GeoNames dump files the lexicon is built from.
#[derive(Debug, Clone)]
pub struct GeonamesSources {
    pub country_info: PathBuf,
    pub admin1: PathBuf,
    pub cities: PathBuf,
}

impl GeonamesSources {
    /// The standard dump file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            country_info: dir.join("countryInfo.txt"),
            admin1: dir.join("admin1CodesASCII.txt"),
            cities: dir.join("cities15000.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeSet<LocationEntry>,
    countries: BTreeSet<CountryCode>,
}

impl Lexicon {
    pub fn new(countries: impl IntoIterator<Item = CountryCode>) -> Self {
        Self {
            entries: BTreeSet::new(),
            countries: countries.into_iter().collect(),
        }
    }

    /// Inserts an entry after normalizing its surface. Returns false when
    /// the entry duplicates an existing one.
    pub fn insert(&mut self, surface: &str, country: CountryCode, kind: LocationKind) -> Result<bool> {
        if !self.countries.contains(&country) {
            return Err(Error::argument(format!("country {country} is not configured")));
        }
        let surface = normalize_text(surface).text;
        if surface.is_empty() {
            return Err(Error::argument("empty surface"));
        }
        Ok(self.entries.insert(LocationEntry { surface, country, kind }))
    }

    pub fn entries(&self) -> impl Iterator<Item = &LocationEntry> {
        self.entries.iter()
    }

    pub fn countries(&self) -> &BTreeSet<CountryCode> {
        &self.countries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_by_kind(&self) -> BTreeMap<LocationKind, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.kind).or_insert(0) += 1;
        }
        counts
    }

    /// Sorted TSV: format comment, configured countries, header, then one
    /// `surface<TAB>country<TAB>kind` row per entry.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let countries: Vec<&str> = self.countries.iter().map(CountryCode::as_str).collect();
        writeln!(out, "{LEXICON_FORMAT}")?;
        writeln!(out, "# countries {}", countries.join(","))?;
        writeln!(out, "surface\tcountry\tkind")?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.surface, e.country, e.kind)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(source: R) -> Result<Self> {
        let mut lines = source.lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(Error::io("reading lexicon", e)),
                None => Err(Error::format(format!("lexicon TSV: missing {what}"))),
            }
        };
        let (_, version) = next_line("format line")?;
        if version.trim_end() != LEXICON_FORMAT {
            return Err(Error::format(format!("lexicon TSV line 1: unsupported format {version:?}")));
        }
        let (_, countries_line) = next_line("countries line")?;
        let codes = countries_line
            .strip_prefix("# countries ")
            .ok_or_else(|| Error::format("lexicon TSV line 2: expected '# countries ...'"))?;
        let countries = codes
            .split(',')
            .filter(|c| !c.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<CountryCode>>>()
            .map_err(|e| Error::format(format!("lexicon TSV line 2: {e}")))?;
        let (_, header) = next_line("header")?;
        if header.trim_end() != "surface\tcountry\tkind" {
            return Err(Error::format("lexicon TSV line 3: bad header"));
        }

        let mut lexicon = Lexicon::new(countries);
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io("reading lexicon", e))?;
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| Error::format(format!("lexicon TSV line {}: {why}", i + 1));
            let mut cols = line.split('\t');
            let (Some(surface), Some(country), Some(kind), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad("expected 3 columns"));
            };
            let country: CountryCode = country.parse().map_err(|_| bad("bad country code"))?;
            let kind: LocationKind = kind.parse().map_err(|_| bad("bad kind"))?;
            lexicon
                .insert(surface, country, kind)
                .map_err(|e| bad(&e.to_string()))?;
        }
        Ok(lexicon)
    }
}

struct DumpReader {
    path: PathBuf,
    lines: std::iter::Enumerate<std::io::Lines<BufReader<Box<dyn Read>>>>,
}

impl DumpReader {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::format(format!("GeoNames file {}: cannot open: {e}", path.display())))?;
        Ok(Self::from_reader(path, Box::new(file)))
    }

    fn from_reader(path: &Path, source: Box<dyn Read>) -> Self {
        Self {
            path: path.to_path_buf(),
            lines: BufReader::new(source).lines().enumerate(),
        }
    }

    /// Next non-comment, non-blank row split on tabs, with its line number.
    fn next_row(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        for (i, line) in self.lines.by_ref() {
            let line = line.map_err(|e| {
                Error::format(format!("GeoNames file {} line {}: {e}", self.path.display(), i + 1))
            })?;
            let line = line.trim_start_matches('\u{feff}');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok(Some((i + 1, line.split('\t').map(str::to_string).collect())));
        }
        Ok(None)
    }

    fn error(&self, line: usize, why: &str) -> Error {
        Error::format(format!("GeoNames file {} line {line}: {why}", self.path.display()))
    }
}

/// Builds the lexicon from country-info, admin1 and cities dumps.
///
/// Columns read: country-info ISO code (0) and name (4); admin1 code (0,
/// `CC.xx`) and name (1); cities name (1) and country code (8). Surfaces in
/// the blocklist or shorter than three characters after normalization are
/// dropped.
pub fn build_lexicon(sources: &GeonamesSources, countries: &[CountryCode], blocklist: &Blocklist) -> Result<Lexicon> {
    let wanted: BTreeSet<CountryCode> = countries.iter().copied().collect();
    let mut lexicon = Lexicon::new(wanted.iter().copied());

    let add = |lexicon: &mut Lexicon, name: &str, country: CountryCode, kind: LocationKind| -> Result<()> {
        let surface = normalize_text(name).text;
        if surface.chars().count() < MIN_SURFACE_CHARS || blocklist.contains(&surface) {
            return Ok(());
        }
        lexicon.insert(&surface, country, kind)?;
        Ok(())
    };

    let mut info = DumpReader::open(&sources.country_info)?;
    while let Some((line, row)) = info.next_row()? {
        if row.len() < 5 {
            return Err(info.error(line, "expected at least 5 tab-separated columns"));
        }
        let code: CountryCode = row[0]
            .parse()
            .map_err(|_| info.error(line, &format!("bad ISO code {:?}", row[0])))?;
        if wanted.contains(&code) {
            add(&mut lexicon, &row[4], code, LocationKind::Country)?;
        }
    }

    let mut admin1 = DumpReader::open(&sources.admin1)?;
    while let Some((line, row)) = admin1.next_row()? {
        if row.len() < 2 {
            return Err(admin1.error(line, "expected at least 2 tab-separated columns"));
        }
        let prefix = row[0]
            .split_once('.')
            .map(|(cc, _)| cc)
            .ok_or_else(|| admin1.error(line, &format!("admin1 code {:?} lacks a 'CC.' prefix", row[0])))?;
        let code: CountryCode = prefix
            .parse()
            .map_err(|_| admin1.error(line, &format!("bad ISO code in {:?}", row[0])))?;
        if wanted.contains(&code) {
            add(&mut lexicon, &row[1], code, LocationKind::Admin1)?;
        }
    }

    let mut cities = DumpReader::open(&sources.cities)?;
    while let Some((line, row)) = cities.next_row()? {
        if row.len() < 9 {
            return Err(cities.error(line, "expected at least 9 tab-separated columns"));
        }
        let code: CountryCode = row[8]
            .parse()
            .map_err(|_| cities.error(line, &format!("bad country code {:?}", row[8])))?;
        if wanted.contains(&code) {
            add(&mut lexicon, &row[1], code, LocationKind::City)?;
        }
    }

    Ok(lexicon)
}
