use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Grid, Timestamp};

/// A fixed-interval series. `None` marks a gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSeries {
    pub start: Timestamp,
    pub interval: i64,
    pub values: Vec<Option<f64>>,
}

impl UniformSeries {
    pub fn new(start: Timestamp, interval: i64, values: Vec<Option<f64>>) -> Result<Self> {
        if interval <= 0 {
            return Err(Error::invalid("series interval must be positive"));
        }
        if values.is_empty() {
            return Err(Error::invalid("series must hold at least one value"));
        }
        Ok(UniformSeries {
            start,
            interval,
            values,
        })
    }

    pub fn dense(start: Timestamp, interval: i64, values: Vec<f64>) -> Result<Self> {
        Self::new(start, interval, values.into_iter().map(Some).collect())
    }

    pub fn on_grid(grid: &Grid, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Misaligned(alloc::format!(
                "{} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Self::new(grid.start, grid.interval, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, k: usize) -> Timestamp {
        self.start + k as i64 * self.interval
    }

    pub fn gap_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Values with gaps rejected.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or(Error::GapInSeries(i)))
            .collect()
    }

    /// Replaces each gap by the last preceding value. Leading gaps are
    /// back-filled from the first observation so the result is dense whenever
    /// at least one value exists.
    pub fn forward_filled(&self) -> UniformSeries {
        let first = self.values.iter().flatten().next().copied();
        let mut last = first;
        let values = self
            .values
            .iter()
            .map(|v| {
                if v.is_some() {
                    last = *v;
                }
                last
            })
            .collect();
        UniformSeries {
            start: self.start,
            interval: self.interval,
            values,
        }
    }
}

/// A direction class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Direction {
    Down,
    Flat,
    Up,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Down, Direction::Flat, Direction::Up];

    pub fn value(self) -> i8 {
        match self {
            Direction::Down => -1,
            Direction::Flat => 0,
            Direction::Up => 1,
        }
    }

    pub fn from_value(v: i8) -> Option<Direction> {
        match v {
            -1 => Some(Direction::Down),
            0 => Some(Direction::Flat),
            1 => Some(Direction::Up),
            _ => None,
        }
    }

    /// Position in the class order (-1, 0, +1).
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Direction::ALL[i]
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        d.value()
    }
}

impl TryFrom<i8> for Direction {
    type Error = &'static str;

    fn try_from(v: i8) -> core::result::Result<Self, Self::Error> {
        Direction::from_value(v).ok_or("direction must be -1, 0 or 1")
    }
}

/// Direction labels. Label `k` describes the move from source observation `k`
/// to `k + 1`, so `start` is one interval after the source series start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSeries {
    pub start: Timestamp,
    pub interval: i64,
    pub labels: Vec<Direction>,
}

impl DirectionSeries {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn timestamp(&self, k: usize) -> Timestamp {
        self.start + k as i64 * self.interval
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for d in &self.labels {
            c[d.index()] += 1;
        }
        c
    }
}
