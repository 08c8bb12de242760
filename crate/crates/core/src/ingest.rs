//! Parsers and writers for the three tabular input feeds.
//!
//! All feeds are UTF-8, comma separated, RFC 4180 quoted, with a mandatory
//! header row that must match the schema exactly:
//!
//! | feed    | header                                       |
//! |---------|----------------------------------------------|
//! | news    | `story_id,company,date,hour,relevance,ess`   |
//! | twitter | `date,company,volume,positive,negative,neutral` |
//! | market  | `date,close,high,low`                        |
//!
//! Row numbers in errors count data rows from 1 (the header is row 0).

use std::collections::{HashMap, HashSet};
use std::io::Read;

use chrono::{NaiveDate, NaiveTime, Timelike};
use csv::StringRecord;
use thiserror::Error;

use crate::numfmt::g17;

pub const NEWS_HEADER: [&str; 6] = ["story_id", "company", "date", "hour", "relevance", "ess"];
pub const TWITTER_HEADER: [&str; 6] = [
    "date", "company", "volume", "positive", "negative", "neutral",
];
pub const MARKET_HEADER: [&str; 4] = ["date", "close", "high", "low"];

/// Default relevance threshold: keep headline stories only.
pub const DEFAULT_RELEVANCE: u8 = 100;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("row {row}: {source}")]
    Csv {
        row: usize,
        #[source]
        source: csv::Error,
    },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: field `{field}`: {message}")]
    Field {
        row: usize,
        field: &'static str,
        message: String,
    },
    #[error("row {row}: {message}")]
    Validation { row: usize, message: String },
    #[error("row {row}: duplicate key {key}")]
    Duplicate { row: usize, key: String },
}

impl IngestError {
    /// Data row the error refers to; `None` for header problems.
    pub fn row(&self) -> Option<usize> {
        match self {
            IngestError::Header { .. } => None,
            IngestError::Csv { row, .. }
            | IngestError::Field { row, .. }
            | IngestError::Validation { row, .. }
            | IngestError::Duplicate { row, .. } => Some(*row),
        }
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// One scored news story.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsEvent {
    pub story_id: String,
    pub company: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub relevance: u8,
    pub ess: u8,
}

/// One day of social-media message counts for a company.
///
/// `positive + negative + neutral` covers English messages only and never
/// exceeds `volume`, which counts all languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwitterDailyRecord {
    pub date: NaiveDate,
    pub company: String,
    pub volume: u64,
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
}

/// Daily close/high/low for a stock or index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketBar {
    pub date: NaiveDate,
    pub close: f64,
    pub high: f64,
    pub low: f64,
}

impl MarketBar {
    /// Checks positivity and `low <= close <= high`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("close", self.close),
            ("high", self.high),
            ("low", self.low),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be a positive finite price, got {v}"));
            }
        }
        if self.high < self.low {
            return Err(format!("high {} is below low {}", self.high, self.low));
        }
        if self.close < self.low || self.close > self.high {
            return Err(format!(
                "close {} outside [low {}, high {}]",
                self.close, self.low, self.high
            ));
        }
        Ok(())
    }
}

struct Rows<R: Read> {
    reader: csv::Reader<R>,
    row: usize,
}

impl<R: Read> Rows<R> {
    /// Opens a stream, checking the header. `None` for a completely empty stream.
    fn open(input: R, header: &[&str]) -> Result<Option<Self>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_reader(input);
        let mut first = StringRecord::new();
        let got = reader
            .read_record(&mut first)
            .map_err(|source| IngestError::Csv { row: 0, source })?;
        if !got {
            return Ok(None);
        }
        // Tolerate a UTF-8 byte-order mark on the first header cell.
        let found: Vec<&str> = first
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if i == 0 {
                    f.trim_start_matches('\u{feff}')
                } else {
                    f
                }
            })
            .collect();
        if found != header {
            return Err(IngestError::Header {
                expected: header.join(","),
                found: found.join(","),
            });
        }
        Ok(Some(Rows { reader, row: 0 }))
    }

    fn next(&mut self) -> Option<Result<(usize, StringRecord)>> {
        let mut record = StringRecord::new();
        self.row += 1;
        match self.reader.read_record(&mut record) {
            Ok(true) => Some(Ok((self.row, record))),
            Ok(false) => None,
            Err(source) => Some(Err(IngestError::Csv {
                row: self.row,
                source,
            })),
        }
    }
}

fn field<'r>(
    record: &'r StringRecord,
    idx: usize,
    name: &'static str,
    row: usize,
) -> Result<&'r str> {
    record.get(idx).ok_or_else(|| IngestError::Field {
        row,
        field: name,
        message: "missing".into(),
    })
}

fn field_err(row: usize, field: &'static str, message: impl Into<String>) -> IngestError {
    IngestError::Field {
        row,
        field,
        message: message.into(),
    }
}

fn parse_int(s: &str, row: usize, name: &'static str) -> Result<i64> {
    s.parse::<i64>()
        .map_err(|e| field_err(row, name, format!("`{s}` is not an integer ({e})")))
}

fn parse_score(s: &str, row: usize, name: &'static str) -> Result<u8> {
    let v = parse_int(s, row, name)?;
    if !(0..=100).contains(&v) {
        return Err(IngestError::Validation {
            row,
            message: format!("{name} {v} outside [0, 100]"),
        });
    }
    Ok(v as u8)
}

fn parse_count(s: &str, row: usize, name: &'static str) -> Result<u64> {
    let v = parse_int(s, row, name)?;
    if v < 0 {
        return Err(IngestError::Validation {
            row,
            message: format!("{name} count {v} is negative"),
        });
    }
    Ok(v as u64)
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses an eight-digit `YYYYMMDD` date.
pub fn parse_compact_date(s: &str) -> Option<NaiveDate> {
    if s.len() != 8 || !all_digits(s) {
        return None;
    }
    let y = s[0..4].parse().ok()?;
    let m = s[4..6].parse().ok()?;
    let d = s[6..8].parse().ok()?;
    NaiveDate::from_ymd_opt(y, m, d)
}

/// Parses an `HHMMSS` time stored as an integer with leading zeros dropped
/// (`41357` is 04:13:57).
pub fn parse_packed_time(s: &str) -> Option<NaiveTime> {
    if s.len() > 6 || !all_digits(s) {
        return None;
    }
    let padded = format!("{s:0>6}");
    let h = padded[0..2].parse().ok()?;
    let m = padded[2..4].parse().ok()?;
    let sec = padded[4..6].parse().ok()?;
    NaiveTime::from_hms_opt(h, m, sec)
}

/// Inverse of [`parse_packed_time`].
pub fn format_packed_time(t: NaiveTime) -> String {
    (t.hour() * 10_000 + t.minute() * 100 + t.second()).to_string()
}

/// Parses a `DD/MM/YYYY` date.
pub fn parse_dmy_date(s: &str) -> Option<NaiveDate> {
    let parts: Vec<&str> = s.split('/').collect();
    match parts.as_slice() {
        [d, m, y] if d.len() == 2 && m.len() == 2 && y.len() == 4 => {
            if !(all_digits(d) && all_digits(m) && all_digits(y)) {
                return None;
            }
            NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, d.parse().ok()?)
        }
        _ => None,
    }
}

/// Parses an ISO `YYYY-MM-DD` date.
pub fn parse_iso_date(s: &str) -> Option<NaiveDate> {
    if s.len() != 10 {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn parse_news<R: Read>(input: R) -> Result<Vec<NewsEvent>> {
    let Some(mut rows) = Rows::open(input, &NEWS_HEADER)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    while let Some(next) = rows.next() {
        let (row, rec) = next?;
        let story_id = field(&rec, 0, "story_id", row)?.to_string();
        let company = field(&rec, 1, "company", row)?.to_string();
        let date_s = field(&rec, 2, "date", row)?;
        let date = parse_compact_date(date_s)
            .ok_or_else(|| field_err(row, "date", format!("`{date_s}` is not a YYYYMMDD date")))?;
        let hour_s = field(&rec, 3, "hour", row)?;
        let time = parse_packed_time(hour_s)
            .ok_or_else(|| field_err(row, "hour", format!("`{hour_s}` is not an HHMMSS time")))?;
        let relevance = parse_score(field(&rec, 4, "relevance", row)?, row, "relevance")?;
        let ess = parse_score(field(&rec, 5, "ess", row)?, row, "ess")?;
        out.push(NewsEvent {
            story_id,
            company,
            date,
            time,
            relevance,
            ess,
        });
    }
    Ok(out)
}

/// Keeps events with `relevance >= threshold`, preserving order.
pub fn filter_relevant(events: &[NewsEvent], threshold: u8) -> Vec<NewsEvent> {
    events
        .iter()
        .filter(|e| e.relevance >= threshold)
        .cloned()
        .collect()
}

pub fn parse_twitter<R: Read>(input: R) -> Result<Vec<TwitterDailyRecord>> {
    let Some(mut rows) = Rows::open(input, &TWITTER_HEADER)? else {
        return Ok(Vec::new());
    };
    let mut seen: HashSet<(NaiveDate, String)> = HashSet::new();
    let mut out = Vec::new();
    while let Some(next) = rows.next() {
        let (row, rec) = next?;
        let date_s = field(&rec, 0, "date", row)?;
        let date = parse_dmy_date(date_s).ok_or_else(|| {
            field_err(row, "date", format!("`{date_s}` is not a DD/MM/YYYY date"))
        })?;
        let company = field(&rec, 1, "company", row)?.to_string();
        let volume = parse_count(field(&rec, 2, "volume", row)?, row, "volume")?;
        let positive = parse_count(field(&rec, 3, "positive", row)?, row, "positive")?;
        let negative = parse_count(field(&rec, 4, "negative", row)?, row, "negative")?;
        let neutral = parse_count(field(&rec, 5, "neutral", row)?, row, "neutral")?;
        let english = positive
            .checked_add(negative)
            .and_then(|s| s.checked_add(neutral))
            .ok_or_else(|| IngestError::Validation {
                row,
                message: "count overflow".into(),
            })?;
        if english > volume {
            return Err(IngestError::Validation {
                row,
                message: format!(
                    "positive+negative+neutral = {english} exceeds total volume {volume}"
                ),
            });
        }
        if !seen.insert((date, company.clone())) {
            return Err(IngestError::Duplicate {
                row,
                key: format!("({date}, {company})"),
            });
        }
        out.push(TwitterDailyRecord {
            date,
            company,
            volume,
            positive,
            negative,
            neutral,
        });
    }
    Ok(out)
}

fn parse_price(s: &str, row: usize, name: &'static str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| field_err(row, name, format!("`{s}` is not a decimal ({e})")))
}

/// Parses bars and returns them sorted ascending by date.
pub fn parse_market<R: Read>(input: R) -> Result<Vec<MarketBar>> {
    let Some(mut rows) = Rows::open(input, &MARKET_HEADER)? else {
        return Ok(Vec::new());
    };
    let mut first_row: HashMap<NaiveDate, usize> = HashMap::new();
    let mut out = Vec::new();
    while let Some(next) = rows.next() {
        let (row, rec) = next?;
        let date_s = field(&rec, 0, "date", row)?;
        let date = parse_iso_date(date_s).ok_or_else(|| {
            field_err(row, "date", format!("`{date_s}` is not a YYYY-MM-DD date"))
        })?;
        let bar = MarketBar {
            date,
            close: parse_price(field(&rec, 1, "close", row)?, row, "close")?,
            high: parse_price(field(&rec, 2, "high", row)?, row, "high")?,
            low: parse_price(field(&rec, 3, "low", row)?, row, "low")?,
        };
        bar.validate()
            .map_err(|message| IngestError::Validation { row, message })?;
        if let Some(prev) = first_row.insert(date, row) {
            return Err(IngestError::Duplicate {
                row,
                key: format!("date {date} (first seen at row {prev})"),
            });
        }
        out.push(bar);
    }
    out.sort_by_key(|b| b.date);
    Ok(out)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory csv writer never fails")
}

pub fn write_news(events: &[NewsEvent]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(NEWS_HEADER).expect("in-memory write");
    for e in events {
        w.write_record([
            e.story_id.clone(),
            e.company.clone(),
            e.date.format("%Y%m%d").to_string(),
            format_packed_time(e.time),
            e.relevance.to_string(),
            e.ess.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_twitter(records: &[TwitterDailyRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TWITTER_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.date.format("%d/%m/%Y").to_string(),
            r.company.clone(),
            r.volume.to_string(),
            r.positive.to_string(),
            r.negative.to_string(),
            r.neutral.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_market(bars: &[MarketBar]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MARKET_HEADER).expect("in-memory write");
    for b in bars {
        w.write_record([
            b.date.format("%Y-%m-%d").to_string(),
            g17(b.close),
            g17(b.high),
            g17(b.low),
        ])
        .expect("in-memory write");
    }
    finish(w)
}
