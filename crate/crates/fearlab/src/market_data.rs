//! Readers and writers for recorded quote, tweet, trends and index-price files.
//!
//! Every input row ends up either as a record or as a [`Rejection`]; nothing
//! is dropped silently. Output records are sorted by timestamp.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fearlab_core::records::filter_retweets;
use fearlab_core::{OptionQuoteRecord, Side, Timestamp, TrendsRecord, TweetRecord};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{FearlabError, Result};
use crate::timefmt;

pub const QUOTE_COLUMNS: [&str; 6] = ["timestamp", "expiry", "strike", "side", "bid", "ask"];
const MAX_MALFORMED: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuoteFormat {
    Csv,
    Jsonl,
}

impl QuoteFormat {
    /// `.jsonl` / `.json` / `.ndjson` are JSON lines, everything else CSV.
    pub fn from_path(path: &Path) -> QuoteFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json" | "ndjson") => QuoteFormat::Jsonl,
            _ => QuoteFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the source file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested<T> {
    pub records: Vec<T>,
    /// Data rows seen, excluding headers and blank lines.
    pub rows: usize,
    pub rejected: Vec<Rejection>,
}

impl<T> Ingested<T> {
    fn new() -> Self {
        Ingested {
            records: Vec::new(),
            rows: 0,
            rejected: Vec::new(),
        }
    }

    fn reject(&mut self, line: usize, reason: impl ToString) {
        self.rejected.push(Rejection {
            line,
            reason: reason.to_string(),
        });
    }

    fn check_budget(&self, path: &Path) -> Result<()> {
        let bad = self.rejected.len();
        if self.rows > 0 && bad as f64 > MAX_MALFORMED * self.rows as f64 {
            let first = &self.rejected[0];
            return Err(FearlabError::TooManyMalformed {
                path: path.to_path_buf(),
                bad,
                total: self.rows,
                first: format!("line {}: {}", first.line, first.reason),
            });
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| FearlabError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| FearlabError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> FearlabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FearlabError::io(path, io),
        other => FearlabError::artifact(path, format!("{other:?}")),
    }
}

fn time_field(text: &str, name: &str) -> Result<Timestamp, String> {
    timefmt::parse(text).ok_or_else(|| format!("bad {name} `{text}`"))
}

fn number_field(text: &str, name: &str) -> Result<f64, String> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("bad {name} `{text}`"))
}

fn quote_from_strings(fields: [&str; 6]) -> Result<OptionQuoteRecord, String> {
    let [timestamp, expiry, strike, side, bid, ask] = fields;
    let q = OptionQuoteRecord {
        timestamp: time_field(timestamp, "timestamp")?,
        expiry: time_field(expiry, "expiry")?,
        strike: number_field(strike, "strike")?,
        side: Side::from_code(side.trim()).ok_or_else(|| format!("bad side `{side}`"))?,
        bid: number_field(bid, "bid")?,
        ask: number_field(ask, "ask")?,
    };
    q.validate().map_err(|e| e.to_string())?;
    Ok(q)
}

/// JSON scalars as the text a CSV cell would hold.
fn json_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn quote_from_json(obj: &Map<String, Value>) -> Result<OptionQuoteRecord, String> {
    let mut cells: Vec<String> = Vec::with_capacity(6);
    for col in QUOTE_COLUMNS {
        let v = obj.get(col).ok_or_else(|| format!("missing `{col}`"))?;
        cells.push(json_text(v).ok_or_else(|| format!("`{col}` must be a string or number"))?);
    }
    quote_from_strings([&cells[0], &cells[1], &cells[2], &cells[3], &cells[4], &cells[5]])
}

pub fn parse_quotes(path: &Path, format: QuoteFormat) -> Result<Ingested<OptionQuoteRecord>> {
    let mut out = match format {
        QuoteFormat::Csv => parse_quotes_csv(path)?,
        QuoteFormat::Jsonl => parse_quotes_jsonl(path)?,
    };
    out.check_budget(path)?;
    out.records.sort_by_key(|q| q.timestamp);
    Ok(out)
}

fn parse_quotes_csv(path: &Path) -> Result<Ingested<OptionQuoteRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut idx = [0usize; 6];
    for (slot, col) in idx.iter_mut().zip(QUOTE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| FearlabError::UnknownSchema {
                path: path.to_path_buf(),
                detail: format!("expected header `{}`", QUOTE_COLUMNS.join(",")),
            })?;
    }
    let mut out = Ingested::new();
    for row in reader.records() {
        out.rows += 1;
        let line = out.rows + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.reject(line, e);
                continue;
            }
        };
        let cell = |k: usize| row.get(idx[k]).unwrap_or("");
        match quote_from_strings([cell(0), cell(1), cell(2), cell(3), cell(4), cell(5)]) {
            Ok(q) => out.records.push(q),
            Err(reason) => out.reject(line, reason),
        }
    }
    Ok(out)
}

/// Non-blank lines of a JSON-lines file with their 1-based line numbers.
fn json_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut lines = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| FearlabError::io(path, e))?;
        if !line.trim().is_empty() {
            lines.push((n + 1, line));
        }
    }
    Ok(lines)
}

fn parse_quotes_jsonl(path: &Path) -> Result<Ingested<OptionQuoteRecord>> {
    let mut out = Ingested::new();
    for (k, (line, text)) in json_lines(path)?.into_iter().enumerate() {
        out.rows += 1;
        let obj = match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(obj)) => obj,
            Ok(_) => {
                out.reject(line, "not a JSON object");
                continue;
            }
            Err(e) => {
                out.reject(line, e);
                continue;
            }
        };
        if k == 0 && !QUOTE_COLUMNS.iter().all(|c| obj.contains_key(*c)) {
            return Err(FearlabError::UnknownSchema {
                path: path.to_path_buf(),
                detail: format!("first record lacks one of {}", QUOTE_COLUMNS.join(", ")),
            });
        }
        match quote_from_json(&obj) {
            Ok(q) => out.records.push(q),
            Err(reason) => out.reject(line, reason),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct QuoteRow<'a> {
    timestamp: String,
    expiry: String,
    strike: f64,
    side: &'a str,
    bid: f64,
    ask: f64,
}

fn quote_row(q: &OptionQuoteRecord) -> QuoteRow<'static> {
    QuoteRow {
        timestamp: timefmt::format(q.timestamp),
        expiry: timefmt::format(q.expiry),
        strike: q.strike,
        side: q.side.code(),
        bid: q.bid,
        ask: q.ask,
    }
}

pub fn write_quotes(path: &Path, quotes: &[OptionQuoteRecord], format: QuoteFormat) -> Result<()> {
    match format {
        QuoteFormat::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            for q in quotes {
                w.serialize(quote_row(q)).map_err(|e| csv_error(path, e))?;
            }
            w.flush().map_err(|e| FearlabError::io(path, e))
        }
        QuoteFormat::Jsonl => {
            let mut w = create(path)?;
            for q in quotes {
                let line = serde_json::to_string(&quote_row(q)).expect("quote rows serialise");
                writeln!(w, "{line}").map_err(|e| FearlabError::io(path, e))?;
            }
            w.flush().map_err(|e| FearlabError::io(path, e))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetIngest {
    pub tweets: Ingested<TweetRecord>,
    /// Valid records removed as retweets.
    pub retweets: usize,
}

#[derive(Deserialize)]
struct TweetLine {
    timestamp: Value,
    text: String,
    #[serde(default)]
    is_retweet: bool,
    #[serde(default)]
    compound: Option<f64>,
}

/// Reads tweets, drops retweets and returns the survivors sorted by time.
pub fn parse_tweets(path: &Path) -> Result<TweetIngest> {
    let mut out = Ingested::new();
    for (line, text) in json_lines(path)? {
        out.rows += 1;
        let value: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                out.reject(line, e);
                continue;
            }
        };
        if value.get("timestamp").is_none() {
            return Err(FearlabError::Invalid {
                path: path.to_path_buf(),
                line,
                message: "missing `timestamp` field".into(),
            });
        }
        let raw: TweetLine = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                out.reject(line, e);
                continue;
            }
        };
        let Some(timestamp) = json_text(&raw.timestamp).and_then(|t| timefmt::parse(&t)) else {
            out.reject(line, format!("bad timestamp {}", raw.timestamp));
            continue;
        };
        let tweet = TweetRecord {
            timestamp,
            text: raw.text,
            is_retweet: raw.is_retweet,
            compound: raw.compound,
        };
        match tweet.validate() {
            Ok(()) => out.records.push(tweet),
            Err(e) => out.reject(line, e),
        }
    }
    out.check_budget(path)?;
    let before = out.records.len();
    out.records = filter_retweets(std::mem::take(&mut out.records));
    let retweets = before - out.records.len();
    out.records.sort_by_key(|t| t.timestamp);
    Ok(TweetIngest { tweets: out, retweets })
}

#[derive(Serialize)]
struct TweetOut<'a> {
    timestamp: String,
    text: &'a str,
    is_retweet: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    compound: Option<f64>,
}

pub fn write_tweets(path: &Path, tweets: &[TweetRecord]) -> Result<()> {
    let mut w = create(path)?;
    for t in tweets {
        let row = TweetOut {
            timestamp: timefmt::format(t.timestamp),
            text: &t.text,
            is_retweet: t.is_retweet,
            compound: t.compound,
        };
        let line = serde_json::to_string(&row).expect("tweet rows serialise");
        writeln!(w, "{line}").map_err(|e| FearlabError::io(path, e))?;
    }
    w.flush().map_err(|e| FearlabError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendsIngest {
    pub records: Vec<TrendsRecord>,
    /// Spans between consecutive knots longer than one hour, as (from, to).
    pub gaps: Vec<(Timestamp, Timestamp)>,
}

fn two_column_rows(path: &Path, columns: [&str; 2]) -> Result<Vec<(usize, Timestamp, f64)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 || headers[0] != *columns[0] || headers[1] != *columns[1] {
        return Err(FearlabError::UnknownSchema {
            path: path.to_path_buf(),
            detail: format!("expected header `{},{}`", columns[0], columns[1]),
        });
    }
    let mut rows = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let line = n + 2;
        let invalid = |message: String| FearlabError::Invalid {
            path: path.to_path_buf(),
            line,
            message,
        };
        let row = row.map_err(|e| invalid(e.to_string()))?;
        let ts = time_field(&row[0], columns[0]).map_err(invalid)?;
        let v = number_field(&row[1], columns[1]).map_err(invalid)?;
        rows.push((line, ts, v));
    }
    rows.sort_by_key(|r| r.1);
    if let Some(w) = rows.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(FearlabError::Invalid {
            path: path.to_path_buf(),
            line: w[1].0,
            message: format!("duplicate timestamp {}", timefmt::format(w[1].1)),
        });
    }
    Ok(rows)
}

pub fn parse_trends(path: &Path) -> Result<TrendsIngest> {
    let rows = two_column_rows(path, ["timestamp", "value"])?;
    let mut records = Vec::with_capacity(rows.len());
    for (line, timestamp, value) in rows {
        let r = TrendsRecord { timestamp, value };
        r.validate().map_err(|e| FearlabError::Invalid {
            path: path.to_path_buf(),
            line,
            message: format!("{e}: {value}"),
        })?;
        records.push(r);
    }
    let gaps = records
        .windows(2)
        .filter(|w| w[1].timestamp - w[0].timestamp > fearlab_core::time::HOUR)
        .map(|w| (w[0].timestamp, w[1].timestamp))
        .collect();
    Ok(TrendsIngest { records, gaps })
}

pub fn write_trends(path: &Path, records: &[TrendsRecord]) -> Result<()> {
    write_points(path, ["timestamp", "value"], records.iter().map(|r| (r.timestamp, r.value)))
}

/// Underlying index prices, `timestamp,price`, strictly positive.
pub fn parse_index_prices(path: &Path) -> Result<Vec<(Timestamp, f64)>> {
    let rows = two_column_rows(path, ["timestamp", "price"])?;
    rows.into_iter()
        .map(|(line, ts, p)| {
            if p > 0.0 {
                Ok((ts, p))
            } else {
                Err(FearlabError::Invalid {
                    path: path.to_path_buf(),
                    line,
                    message: format!("price must be positive, got {p}"),
                })
            }
        })
        .collect()
}

pub fn write_index_prices(path: &Path, points: &[(Timestamp, f64)]) -> Result<()> {
    write_points(path, ["timestamp", "price"], points.iter().copied())
}

fn write_points(path: &Path, header: [&str; 2], points: impl Iterator<Item = (Timestamp, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (ts, v) in points {
        w.write_record([timefmt::format(ts), v.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| FearlabError::io(path, e))
}
