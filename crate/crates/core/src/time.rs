//! Instants are plain UTC Unix seconds. The calendar helpers here are the
//! minimum needed to locate weekly expiries without a date library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

pub const MINUTE: i64 = 60;
pub const HOUR: i64 = 60 * MINUTE;
pub const DAY: i64 = 24 * HOUR;
pub const WEEK: i64 = 7 * DAY;

/// Minutes in a 365-day year.
pub const YEAR_MINUTES: f64 = 525_600.0;

/// Weekly expiries settle on Fridays at 08:00 UTC.
pub const WEEKLY_EXPIRY_OFFSET: i64 = 8 * HOUR;

/// Day of week with Monday = 0.
pub fn weekday(t: Timestamp) -> u32 {
    // 1970-01-01 was a Thursday.
    (t.div_euclid(DAY) + 3).rem_euclid(7) as u32
}

pub fn is_weekly_expiry(t: Timestamp) -> bool {
    weekday(t) == 4 && t.rem_euclid(DAY) == WEEKLY_EXPIRY_OFFSET
}

/// First Friday 08:00 UTC strictly after `t`.
pub fn next_weekly_expiry(t: Timestamp) -> Timestamp {
    let midnight = t.div_euclid(DAY) * DAY;
    let days_ahead = (4 + 7 - weekday(t) as i64) % 7;
    let candidate = midnight + days_ahead * DAY + WEEKLY_EXPIRY_OFFSET;
    if candidate > t {
        candidate
    } else {
        candidate + WEEK
    }
}

/// A half-open evaluation schedule `[start, end)` stepped by `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub start: Timestamp,
    pub end: Timestamp,
    pub interval: i64,
}

impl Grid {
    pub fn new(start: Timestamp, end: Timestamp, interval: i64) -> Result<Self> {
        if interval <= 0 {
            return Err(Error::invalid("grid interval must be positive"));
        }
        if start >= end {
            return Err(Error::invalid("grid start must precede end"));
        }
        if (end - start) % interval != 0 {
            return Err(Error::invalid("grid interval must divide the span"));
        }
        Ok(Grid {
            start,
            end,
            interval,
        })
    }

    pub fn len(&self) -> usize {
        ((self.end - self.start) / self.interval) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instant(&self, k: usize) -> Timestamp {
        self.start + k as i64 * self.interval
    }

    pub fn instants(&self) -> impl Iterator<Item = Timestamp> + '_ {
        (0..self.len()).map(move |k| self.instant(k))
    }

    /// Index of the bucket `[instant(k), instant(k) + interval)` holding `t`.
    pub fn bucket(&self, t: Timestamp) -> Option<usize> {
        if t < self.start || t >= self.end {
            None
        } else {
            Some(((t - self.start) / self.interval) as usize)
        }
    }
}
