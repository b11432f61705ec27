//! ISO-3166 alpha-2 codes and the default study country table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An upper-case ISO-3166 alpha-2 country code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("country codes are ASCII")
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes();
        match bytes {
            [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => {
                Ok(CountryCode([a.to_ascii_uppercase(), b.to_ascii_uppercase()]))
            }
            _ => Err(Error::argument(format!("not an ISO-3166 alpha-2 code: {s:?}"))),
        }
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyCountry {
    pub code: &'static str,
    pub name: &'static str,
    /// Name used by the Johns Hopkins CSSE time-series files.
    pub case_series_name: &'static str,
}

/// The 32 countries with the highest case counts in spring 2020.
pub const STUDY_COUNTRIES: [StudyCountry; 32] = [
    StudyCountry { code: "AU", name: "Australia", case_series_name: "Australia" },
    StudyCountry { code: "BE", name: "Belgium", case_series_name: "Belgium" },
    StudyCountry { code: "BR", name: "Brazil", case_series_name: "Brazil" },
    StudyCountry { code: "CA", name: "Canada", case_series_name: "Canada" },
    StudyCountry { code: "CL", name: "Chile", case_series_name: "Chile" },
    StudyCountry { code: "CN", name: "China", case_series_name: "China" },
    StudyCountry { code: "EC", name: "Ecuador", case_series_name: "Ecuador" },
    StudyCountry { code: "FR", name: "France", case_series_name: "France" },
    StudyCountry { code: "DE", name: "Germany", case_series_name: "Germany" },
    StudyCountry { code: "IN", name: "India", case_series_name: "India" },
    StudyCountry { code: "IR", name: "Iran", case_series_name: "Iran" },
    StudyCountry { code: "IE", name: "Ireland", case_series_name: "Ireland" },
    StudyCountry { code: "IT", name: "Italy", case_series_name: "Italy" },
    StudyCountry { code: "JP", name: "Japan", case_series_name: "Japan" },
    StudyCountry { code: "MX", name: "Mexico", case_series_name: "Mexico" },
    StudyCountry { code: "NL", name: "Netherlands", case_series_name: "Netherlands" },
    StudyCountry { code: "NZ", name: "New Zealand", case_series_name: "New Zealand" },
    StudyCountry { code: "PK", name: "Pakistan", case_series_name: "Pakistan" },
    StudyCountry { code: "PE", name: "Peru", case_series_name: "Peru" },
    StudyCountry { code: "PT", name: "Portugal", case_series_name: "Portugal" },
    StudyCountry { code: "QA", name: "Qatar", case_series_name: "Qatar" },
    StudyCountry { code: "RU", name: "Russia", case_series_name: "Russia" },
    StudyCountry { code: "SA", name: "Saudi Arabia", case_series_name: "Saudi Arabia" },
    StudyCountry { code: "SG", name: "Singapore", case_series_name: "Singapore" },
    StudyCountry { code: "KR", name: "South Korea", case_series_name: "Korea, South" },
    StudyCountry { code: "ES", name: "Spain", case_series_name: "Spain" },
    StudyCountry { code: "SE", name: "Sweden", case_series_name: "Sweden" },
    StudyCountry { code: "CH", name: "Switzerland", case_series_name: "Switzerland" },
    StudyCountry { code: "TR", name: "Turkey", case_series_name: "Turkey" },
    StudyCountry { code: "AE", name: "United Arab Emirates", case_series_name: "United Arab Emirates" },
    StudyCountry { code: "GB", name: "United Kingdom", case_series_name: "United Kingdom" },
    StudyCountry { code: "US", name: "United States", case_series_name: "US" },
];

pub fn study_country_codes() -> Vec<CountryCode> {
    STUDY_COUNTRIES
        .iter()
        .map(|c| c.code.parse().expect("static table holds valid codes"))
        .collect()
}

pub fn lookup(code: CountryCode) -> Option<&'static StudyCountry> {
    STUDY_COUNTRIES.iter().find(|c| c.code == code.as_str())
}
