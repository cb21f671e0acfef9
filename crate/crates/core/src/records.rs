//! Raw input records and the validation and filtering rules applied to them
//! at ingest time.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "C")]
    Call,
    #[serde(rename = "P")]
    Put,
}

impl Side {
    pub fn code(self) -> &'static str {
        match self {
            Side::Call => "C",
            Side::Put => "P",
        }
    }

    pub fn from_code(s: &str) -> Option<Side> {
        match s {
            "C" => Some(Side::Call),
            "P" => Some(Side::Put),
            _ => None,
        }
    }
}

/// Why a record was refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    NonPositiveStrike,
    NegativeBid,
    AskBelowBid,
    ExpiredAtQuoteTime,
    NonFinite,
    EmptyText,
    TrendOutOfRange,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            RecordError::NonPositiveStrike => "strike must be positive",
            RecordError::NegativeBid => "bid must be non-negative",
            RecordError::AskBelowBid => "ask below bid",
            RecordError::ExpiredAtQuoteTime => "expiry not after quote timestamp",
            RecordError::NonFinite => "non-finite number",
            RecordError::EmptyText => "empty text",
            RecordError::TrendOutOfRange => "trend value outside [0, 100]",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuoteRecord {
    pub timestamp: Timestamp,
    pub expiry: Timestamp,
    pub strike: f64,
    pub side: Side,
    pub bid: f64,
    pub ask: f64,
}

impl OptionQuoteRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if !(self.strike.is_finite() && self.bid.is_finite() && self.ask.is_finite()) {
            return Err(RecordError::NonFinite);
        }
        if self.strike <= 0.0 {
            return Err(RecordError::NonPositiveStrike);
        }
        if self.bid < 0.0 {
            return Err(RecordError::NegativeBid);
        }
        if self.ask < self.bid {
            return Err(RecordError::AskBelowBid);
        }
        if self.expiry <= self.timestamp {
            return Err(RecordError::ExpiredAtQuoteTime);
        }
        Ok(())
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub timestamp: Timestamp,
    pub text: String,
    pub is_retweet: bool,
    /// Pre-computed compound score; when present it replaces the lexicon scorer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compound: Option<f64>,
}

impl TweetRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.text.trim().is_empty() {
            return Err(RecordError::EmptyText);
        }
        if let Some(c) = self.compound {
            if !c.is_finite() {
                return Err(RecordError::NonFinite);
            }
        }
        Ok(())
    }

    /// True when the source flagged the tweet as a retweet or its text carries
    /// a standalone `RT` token.
    pub fn is_retweet(&self) -> bool {
        self.is_retweet || contains_rt_token(&self.text)
    }
}

/// Case-sensitive `RT` as a whole token. Tokens are delimited by whitespace
/// and ASCII punctuation, so `RT @user` and `(RT)` match, `shoRTage` does not.
pub fn contains_rt_token(text: &str) -> bool {
    text.split(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
        .any(|tok| tok == "RT")
}

/// Drops retweets, keeping the relative order of the survivors.
pub fn filter_retweets(tweets: Vec<TweetRecord>) -> Vec<TweetRecord> {
    tweets.into_iter().filter(|t| !t.is_retweet()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendsRecord {
    pub timestamp: Timestamp,
    /// Search interest relative to the period peak: 100 is the peak, 25 means
    /// a quarter of it.
    pub value: f64,
}

impl TrendsRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if !self.value.is_finite() {
            return Err(RecordError::NonFinite);
        }
        if !(0.0..=100.0).contains(&self.value) {
            return Err(RecordError::TrendOutOfRange);
        }
        Ok(())
    }

    pub fn fraction_of_peak(&self) -> f64 {
        self.value / 100.0
    }
}
