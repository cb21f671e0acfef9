//! On-disk layouts of the pipeline artifacts: series and label CSVs, the
//! dataset CSV pair, and JSON documents.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use fearlab_core::dataset::{FeatureName, LabeledDataset};
use fearlab_core::{Direction, DirectionSeries, Timestamp, UniformSeries};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{FearlabError, Result};
use crate::timefmt;

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| FearlabError::artifact(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| FearlabError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| FearlabError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| FearlabError::artifact(path, e))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| FearlabError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| FearlabError::io(path, e))?;
    Ok(csv::Reader::from_reader(BufReader::new(file)))
}

fn finish(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.flush().map_err(|e| FearlabError::io(path, e))
}

fn bad(path: &Path, e: impl ToString) -> FearlabError {
    FearlabError::artifact(path, e)
}

/// `timestamp,<column>` with an empty cell for each gap.
pub fn write_series(path: &Path, column: &str, series: &UniformSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["timestamp", column]).map_err(|e| bad(path, e))?;
    for (k, v) in series.values.iter().enumerate() {
        let cell = v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([timefmt::format(series.timestamp(k)), cell])
            .map_err(|e| bad(path, e))?;
    }
    finish(path, w)
}

/// Timestamps of consecutive rows must step by exactly `interval` seconds.
fn check_uniform(path: &Path, stamps: &[Timestamp], interval: i64) -> Result<()> {
    if stamps.is_empty() {
        return Err(bad(path, "no rows"));
    }
    if let Some(k) = stamps.windows(2).position(|w| w[1] - w[0] != interval) {
        return Err(bad(
            path,
            format!("row {} is not {interval} s after the previous one", k + 2),
        ));
    }
    Ok(())
}

pub fn read_series(path: &Path, interval: i64) -> Result<UniformSeries> {
    let mut stamps = Vec::new();
    let mut values = Vec::new();
    for row in reader(path)?.records() {
        let row = row.map_err(|e| bad(path, e))?;
        stamps.push(timefmt::parse(&row[0]).ok_or_else(|| bad(path, format!("bad timestamp `{}`", &row[0])))?);
        let cell = row.get(1).unwrap_or("").trim();
        values.push(if cell.is_empty() {
            None
        } else {
            Some(cell.parse::<f64>().map_err(|e| bad(path, e))?)
        });
    }
    check_uniform(path, &stamps, interval)?;
    Ok(UniformSeries::new(stamps[0], interval, values)?)
}

pub fn write_labels(path: &Path, labels: &DirectionSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["timestamp", "label"]).map_err(|e| bad(path, e))?;
    for (k, l) in labels.labels.iter().enumerate() {
        w.write_record([timefmt::format(labels.timestamp(k)), l.value().to_string()])
            .map_err(|e| bad(path, e))?;
    }
    finish(path, w)
}

fn direction(path: &Path, cell: &str) -> Result<Direction> {
    cell.trim()
        .parse::<i8>()
        .ok()
        .and_then(Direction::from_value)
        .ok_or_else(|| bad(path, format!("bad direction `{cell}`")))
}

pub fn read_labels(path: &Path, interval: i64) -> Result<DirectionSeries> {
    let mut stamps = Vec::new();
    let mut labels = Vec::new();
    for row in reader(path)?.records() {
        let row = row.map_err(|e| bad(path, e))?;
        stamps.push(timefmt::parse(&row[0]).ok_or_else(|| bad(path, format!("bad timestamp `{}`", &row[0])))?);
        labels.push(direction(path, row.get(1).unwrap_or(""))?);
    }
    check_uniform(path, &stamps, interval)?;
    Ok(DirectionSeries {
        start: stamps[0],
        interval,
        labels,
    })
}

/// Column layout and split point stored next to the dataset CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub target: String,
    pub series: Vec<String>,
    pub window: usize,
    pub horizon: usize,
    pub columns: Vec<String>,
    pub samples: usize,
    pub train_fraction: f64,
    pub train_samples: usize,
    pub test_samples: usize,
}

/// `features.csv` holds `timestamp` plus one column per feature,
/// `targets.csv` holds `timestamp,label`.
pub fn write_dataset(features: &Path, targets: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut w = writer(features)?;
    let mut header = vec!["timestamp".to_string()];
    header.extend(ds.feature_names.iter().map(|f| f.to_string()));
    w.write_record(&header).map_err(|e| bad(features, e))?;
    let mut cells: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        cells.clear();
        cells.push(timefmt::format(ds.timestamps[i]));
        cells.extend(ds.row(i).iter().map(|v| (*v as i8).to_string()));
        w.write_record(&cells).map_err(|e| bad(features, e))?;
    }
    finish(features, w)?;

    let mut w = writer(targets)?;
    w.write_record(["timestamp", "label"]).map_err(|e| bad(targets, e))?;
    for (ts, y) in ds.timestamps.iter().zip(&ds.y) {
        w.write_record([timefmt::format(*ts), y.value().to_string()])
            .map_err(|e| bad(targets, e))?;
    }
    finish(targets, w)
}

pub fn read_dataset(features: &Path, targets: &Path) -> Result<LabeledDataset> {
    let mut r = reader(features)?;
    let header = r.headers().map_err(|e| bad(features, e))?.clone();
    if header.get(0) != Some("timestamp") {
        return Err(bad(features, "first column must be `timestamp`"));
    }
    let names = header
        .iter()
        .skip(1)
        .map(|h| FeatureName::parse(h).ok_or_else(|| bad(features, format!("bad column name `{h}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut x = Vec::new();
    let mut stamps = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| bad(features, e))?;
        if row.len() != names.len() + 1 {
            return Err(bad(features, format!("row {} has {} cells", stamps.len() + 2, row.len())));
        }
        stamps.push(timefmt::parse(&row[0]).ok_or_else(|| bad(features, "bad timestamp"))?);
        for cell in row.iter().skip(1) {
            x.push(direction(features, cell)?.as_f64());
        }
    }
    let mut y = Vec::with_capacity(stamps.len());
    for (k, row) in reader(targets)?.records().enumerate() {
        let row = row.map_err(|e| bad(targets, e))?;
        if stamps.get(k).map(|t| timefmt::format(*t)) != Some(row[0].to_string()) {
            return Err(bad(targets, format!("row {} does not match the feature timestamps", k + 2)));
        }
        y.push(direction(targets, row.get(1).unwrap_or(""))?);
    }
    if y.len() != stamps.len() {
        return Err(bad(targets, "target and feature row counts differ"));
    }
    Ok(LabeledDataset::new(names, x, y, stamps)?)
}

/// Writes `header` then every row, each already formatted as cells.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| bad(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| bad(path, e))?;
    }
    finish(path, w)
}

/// Writes `text` verbatim; used for small hand-formatted files.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| FearlabError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| FearlabError::io(path, e))
}
