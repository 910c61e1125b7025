//! Market data ingest: ES futures bars, VIX bars and Treasury-bill yields,
//! aligned into one record per ES session.
//!
//! The ES file defines the trading calendar. Each retained session carries its
//! daytime (open-to-close) return and the direction label derived from it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::types::Direction;

/// Mildly negative yields are legal; anything below this is a parse problem.
pub const MIN_ANNUAL_YIELD: f64 = -0.01;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line} ({date}): {message}")]
    Inconsistent {
        line: u64,
        date: NaiveDate,
        message: String,
    },
    #[error("duplicate date {date} on line {line}")]
    DuplicateDate { line: u64, date: NaiveDate },
    #[error("{0} series is empty")]
    Empty(&'static str),
    #[error("no VIX bar for {} ES session(s): {}", dates.len(), list_dates(dates))]
    MissingVix { dates: Vec<NaiveDate> },
    #[error("no risk-free rate on or before {0}")]
    NoRate(NaiveDate),
    #[error("ES bar on {0} has no volume")]
    MissingVolume(NaiveDate),
    #[error("dataset needs at least two ES sessions, got {0}")]
    TooShort(usize),
}

fn list_dates(dates: &[NaiveDate]) -> String {
    const SHOWN: usize = 10;
    let mut out = dates
        .iter()
        .take(SHOWN)
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    if dates.len() > SHOWN {
        let _ = write!(out, ", ... ({} more)", dates.len() - SHOWN);
    }
    out
}

/// One instrument-day of prices. Volume is absent for the VIX.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: Option<u64>,
}

impl Bar {
    /// Checks positivity and the high/low envelope.
    pub fn validate(&self) -> Result<(), String> {
        let prices = [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ];
        for (name, p) in prices {
            if !p.is_finite() || p <= 0.0 {
                return Err(format!("{name} {p} is not a positive price"));
            }
        }
        if self.low > self.high {
            return Err(format!("low {} exceeds high {}", self.low, self.high));
        }
        for (name, p) in [("open", self.open), ("close", self.close)] {
            if p < self.low {
                return Err(format!(
                    "{name} {p} < low {} violates low <= {name}",
                    self.low
                ));
            }
            if p > self.high {
                return Err(format!(
                    "{name} {p} > high {} violates high >= {name}",
                    self.high
                ));
            }
        }
        Ok(())
    }
}

/// Fractional change from the session open to the session close.
pub fn daytime_return(bar: &Bar) -> f64 {
    debug_assert!(bar.open > 0.0);
    (bar.close - bar.open) / bar.open
}

/// An annual yield observation, stored as a fraction (0.0525 for 5.25%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub date: NaiveDate,
    pub annual_yield: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingDay {
    pub date: NaiveDate,
    pub es: Bar,
    pub vix: Bar,
    /// Annual risk-free yield as a fraction, forward-filled.
    pub rf_annual: f64,
    pub daytime_return: f64,
    pub label: Direction,
    /// ES volume of the preceding session.
    pub prev_volume: u64,
}

impl TradingDay {
    pub fn new(es: Bar, vix: Bar, rf_annual: f64, prev_volume: u64) -> Self {
        let daytime_return = daytime_return(&es);
        Self {
            date: es.date,
            es,
            vix,
            rf_annual,
            daytime_return,
            label: Direction::from_positive(daytime_return),
            prev_volume,
        }
    }

    /// ES volume of this session (0 when the bar carried none).
    pub fn volume(&self) -> u64 {
        self.es.volume.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub sources: Vec<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub count: usize,
}

/// Sessions in strictly increasing date order, each with ES, VIX and rf.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    days: Vec<TradingDay>,
    meta: DatasetMeta,
}

impl Dataset {
    /// Wraps already-aligned days. Dates must be strictly increasing.
    pub fn from_days(days: Vec<TradingDay>) -> Result<Self, DataError> {
        for (i, pair) in days.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(DataError::DuplicateDate {
                    line: i as u64 + 2,
                    date: pair[1].date,
                });
            }
        }
        let meta = DatasetMeta {
            sources: Vec::new(),
            start: days.first().map(|d| d.date),
            end: days.last().map(|d| d.date),
            count: days.len(),
        };
        Ok(Self { days, meta })
    }

    /// Reads the three input files and aligns them.
    pub fn load(es: &Path, vix: &Path, rates: &Path) -> Result<Self, DataError> {
        let es_bars = parse_bar_csv(&read_file(es)?, true)?;
        let vix_bars = parse_bar_csv(&read_file(vix)?, false)?;
        let rate_points = parse_rate_csv(&read_file(rates)?)?;
        let mut ds = align_sessions(&es_bars, &vix_bars, &rate_points)?;
        ds.meta.sources = [es, vix, rates]
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        Ok(ds)
    }

    pub fn days(&self) -> &[TradingDay] {
        &self.days
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Keeps sessions with `start <= date <= end`.
    pub fn restrict(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Self {
        let days: Vec<_> = self
            .days
            .iter()
            .filter(|d| start.is_none_or(|s| d.date >= s) && end.is_none_or(|e| d.date <= e))
            .cloned()
            .collect();
        let meta = DatasetMeta {
            sources: self.meta.sources.clone(),
            start: days.first().map(|d| d.date),
            end: days.last().map(|d| d.date),
            count: days.len(),
        };
        Self { days, meta }
    }

    pub fn positive_count(&self) -> usize {
        self.days
            .iter()
            .filter(|d| d.label == Direction::Long)
            .count()
    }

    pub fn labels(&self) -> Vec<Direction> {
        self.days.iter().map(|d| d.label).collect()
    }

    /// Serializes every field needed to rebuild the dataset exactly.
    ///
    /// Floats are written with Rust's shortest round-trip formatting so
    /// `from_csv(to_csv())` is value-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DATASET_HEADER);
        out.push('\n');
        for d in &self.days {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                d.date,
                d.es.open,
                d.es.high,
                d.es.low,
                d.es.close,
                d.volume(),
                d.vix.open,
                d.vix.high,
                d.vix.low,
                d.vix.close,
                d.rf_annual,
                d.prev_volume
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, DataError> {
        let mut rdr = reader(text);
        check_header(&mut rdr, &DATASET_HEADER.split(',').collect::<Vec<_>>(), 0)?;
        let mut days = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = line_of(&rec);
            if rec.len() != 12 {
                return Err(DataError::Malformed {
                    line,
                    message: format!("expected 12 fields, found {}", rec.len()),
                });
            }
            let date = parse_date(&rec[0], line)?;
            let f = |i: usize| parse_f64(&rec[i], line);
            let es = Bar {
                date,
                open: f(1)?,
                high: f(2)?,
                low: f(3)?,
                close: f(4)?,
                volume: Some(parse_u64(&rec[5], line)?),
            };
            let vix = Bar {
                date,
                open: f(6)?,
                high: f(7)?,
                low: f(8)?,
                close: f(9)?,
                volume: None,
            };
            for bar in [&es, &vix] {
                bar.validate().map_err(|message| DataError::Inconsistent {
                    line,
                    date,
                    message,
                })?;
            }
            days.push(TradingDay::new(es, vix, f(10)?, parse_u64(&rec[11], line)?));
        }
        Self::from_days(days)
    }

    /// SHA-256 of the canonical CSV serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}

const DATASET_HEADER: &str =
    "date,es_open,es_high,es_low,es_close,es_volume,vix_open,vix_high,vix_low,vix_close,rf_annual,prev_volume";

fn read_file(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::Malformed {
        line,
        message: e.to_string(),
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads the header row and checks that it starts with `expected`. Returns the
/// number of columns present.
fn check_header(
    rdr: &mut csv::Reader<&[u8]>,
    expected: &[&str],
    optional: usize,
) -> Result<usize, DataError> {
    let mut rec = csv::StringRecord::new();
    let has = rdr.read_record(&mut rec).map_err(csv_error)?;
    if !has {
        return Err(DataError::Malformed {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let names: Vec<String> = rec.iter().map(|s| s.to_ascii_lowercase()).collect();
    let required = expected.len() - optional;
    let ok = names.len() >= required
        && names.len() <= expected.len()
        && names.iter().zip(expected).all(|(a, b)| a == b);
    if !ok {
        return Err(DataError::Malformed {
            line: line_of(&rec).max(1),
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                names.join(",")
            ),
        });
    }
    Ok(names.len())
}

fn parse_date(s: &str, line: u64) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| DataError::Malformed {
        line,
        message: format!("bad date `{s}`: {e}"),
    })
}

fn parse_f64(s: &str, line: u64) -> Result<f64, DataError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::Malformed {
            line,
            message: format!("bad number `{s}`"),
        }),
    }
}

fn parse_u64(s: &str, line: u64) -> Result<u64, DataError> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    // Some vendors write volumes as `12345.0`.
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(DataError::Malformed {
            line,
            message: format!("bad volume `{s}`"),
        }),
    }
}

/// Parses `date,open,high,low,close[,volume]` rows, validates each bar and
/// returns them sorted by date.
///
/// With `has_volume` the volume column is required. Without it a volume
/// column, if present, is ignored.
pub fn parse_bar_csv(text: &str, has_volume: bool) -> Result<Vec<Bar>, DataError> {
    let expected = ["date", "open", "high", "low", "close", "volume"];
    let mut rdr = reader(text);
    let cols = check_header(&mut rdr, &expected, if has_volume { 0 } else { 1 })?;
    let mut bars: Vec<(u64, Bar)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        if rec.len() != cols {
            return Err(DataError::Malformed {
                line,
                message: format!("expected {cols} fields, found {}", rec.len()),
            });
        }
        let date = parse_date(&rec[0], line)?;
        let bar = Bar {
            date,
            open: parse_f64(&rec[1], line)?,
            high: parse_f64(&rec[2], line)?,
            low: parse_f64(&rec[3], line)?,
            close: parse_f64(&rec[4], line)?,
            volume: if has_volume {
                Some(parse_u64(&rec[5], line)?)
            } else {
                None
            },
        };
        bar.validate().map_err(|message| DataError::Inconsistent {
            line,
            date,
            message,
        })?;
        bars.push((line, bar));
    }
    bars.sort_by_key(|(line, b)| (b.date, *line));
    for pair in bars.windows(2) {
        if pair[0].1.date == pair[1].1.date {
            return Err(DataError::DuplicateDate {
                line: pair[1].0,
                date: pair[1].1.date,
            });
        }
    }
    Ok(bars.into_iter().map(|(_, b)| b).collect())
}

/// Parses `date,annual_yield_percent` rows into fractional yields, sorted by
/// date.
pub fn parse_rate_csv(text: &str) -> Result<Vec<RatePoint>, DataError> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &["date", "annual_yield_percent"], 0)?;
    let mut points: Vec<(u64, RatePoint)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        if rec.len() != 2 {
            return Err(DataError::Malformed {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let date = parse_date(&rec[0], line)?;
        let annual_yield = parse_f64(&rec[1], line)? / 100.0;
        if annual_yield < MIN_ANNUAL_YIELD {
            return Err(DataError::Inconsistent {
                line,
                date,
                message: format!("yield {}% below floor", annual_yield * 100.0),
            });
        }
        points.push((line, RatePoint { date, annual_yield }));
    }
    points.sort_by_key(|(line, p)| (p.date, *line));
    for pair in points.windows(2) {
        if pair[0].1.date == pair[1].1.date {
            return Err(DataError::DuplicateDate {
                line: pair[1].0,
                date: pair[1].1.date,
            });
        }
    }
    Ok(points.into_iter().map(|(_, p)| p).collect())
}

/// Aligns the three series on the ES calendar.
///
/// VIX must have a bar on every ES date (no interpolation). The rate is the
/// most recent observation on or before the session. The first ES session is
/// dropped because it has no preceding volume.
pub fn align_sessions(
    es: &[Bar],
    vix: &[Bar],
    rates: &[RatePoint],
) -> Result<Dataset, DataError> {
    if es.is_empty() {
        return Err(DataError::Empty("ES"));
    }
    if vix.is_empty() {
        return Err(DataError::Empty("VIX"));
    }
    if rates.is_empty() {
        return Err(DataError::Empty("rate"));
    }
    if es.len() < 2 {
        return Err(DataError::TooShort(es.len()));
    }
    let mut es = es.to_vec();
    es.sort_by_key(|b| b.date);
    let mut vix = vix.to_vec();
    vix.sort_by_key(|b| b.date);
    let mut rates = rates.to_vec();
    rates.sort_by_key(|r| r.date);

    let vix_dates: BTreeSet<NaiveDate> = vix.iter().map(|b| b.date).collect();
    let missing: Vec<NaiveDate> = es[1..]
        .iter()
        .map(|b| b.date)
        .filter(|d| !vix_dates.contains(d))
        .collect();
    if !missing.is_empty() {
        return Err(DataError::MissingVix { dates: missing });
    }

    let mut days = Vec::with_capacity(es.len() - 1);
    let mut vix_iter = vix.iter().peekable();
    for pair in es.windows(2) {
        let (prev, bar) = (&pair[0], &pair[1]);
        let prev_volume = prev.volume.ok_or(DataError::MissingVolume(prev.date))?;
        if bar.volume.is_none() {
            return Err(DataError::MissingVolume(bar.date));
        }
        while vix_iter.peek().is_some_and(|v| v.date < bar.date) {
            vix_iter.next();
        }
        let v = *vix_iter.next().expect("checked above");
        let k = rates.partition_point(|r| r.date <= bar.date);
        if k == 0 {
            return Err(DataError::NoRate(bar.date));
        }
        let rf = rates[k - 1].annual_yield;
        days.push(TradingDay::new(*bar, v, rf, prev_volume));
    }
    Dataset::from_days(days)
}

/// Writes bars in the `parse_bar_csv` layout.
pub fn bars_to_csv(bars: &[Bar], with_volume: bool) -> String {
    let mut out = String::from("date,open,high,low,close");
    if with_volume {
        out.push_str(",volume");
    }
    out.push('\n');
    for b in bars {
        let _ = write!(out, "{},{},{},{},{}", b.date, b.open, b.high, b.low, b.close);
        if with_volume {
            let _ = write!(out, ",{}", b.volume.unwrap_or(0));
        }
        out.push('\n');
    }
    out
}

/// Writes rates in the `parse_rate_csv` layout (percent).
pub fn rates_to_csv(rates: &[RatePoint]) -> String {
    let mut out = String::from("date,annual_yield_percent\n");
    for r in rates {
        let _ = writeln!(out, "{},{}", r.date, r.annual_yield * 100.0);
    }
    out
}
