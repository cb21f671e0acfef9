//! Alternative-data signals on the common evaluation grid: tweet volume and
//! compound sentiment, EWMA smoothing, and hourly search-trend upsampling.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{TrendsRecord, TweetRecord};
use crate::series::UniformSeries;
use crate::time::{Grid, Timestamp};

pub const DEFAULT_ALPHA: f64 = 15.0;
pub const DEFAULT_EWMA_SPAN: usize = 12;

/// Scores a text to a compound sentiment in (-1, 1).
pub trait SentimentScorer {
    fn score(&self, text: &str) -> f64;
}

/// Word valences in [-4, 4] plus the compound normalisation constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeMap<String, f64>,
    alpha: f64,
}

impl Lexicon {
    pub fn new(entries: BTreeMap<String, f64>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("lexicon alpha must be positive"));
        }
        if let Some((w, v)) = entries.iter().find(|(_, v)| !(-4.0..=4.0).contains(*v)) {
            return Err(Error::invalid(alloc::format!("valence {v} for `{w}` outside [-4, 4]")));
        }
        let entries = entries.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        Ok(Lexicon { entries, alpha })
    }

    /// Parses `word<TAB>valence` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str, alpha: f64) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(word), Some(val)) = (parts.next(), parts.next()) else {
                return Err(Error::invalid(alloc::format!("lexicon line {}: expected word<TAB>valence", n + 1)));
            };
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::invalid(alloc::format!("lexicon line {}: bad valence", n + 1)))?;
            entries.insert(word.trim().to_string(), val);
        }
        Self::new(entries, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }
}

impl SentimentScorer for Lexicon {
    fn score(&self, text: &str) -> f64 {
        compound_score(text, self)
    }
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// `s / √(s² + α)` where `s` is the summed valence of lexicon tokens.
pub fn compound_score(text: &str, lexicon: &Lexicon) -> f64 {
    let s: f64 = tokens(text).filter_map(|t| lexicon.valence(&t)).sum();
    if s == 0.0 {
        return 0.0;
    }
    s / libm::sqrt(s * s + lexicon.alpha)
}

/// Per-bucket tweet count and mean compound score. Empty buckets get volume
/// 0 and a sentiment gap. Tweets outside the grid are ignored.
pub fn aggregate_tweets(
    tweets: &[TweetRecord],
    scorer: &dyn SentimentScorer,
    grid: &Grid,
) -> Result<(UniformSeries, UniformSeries)> {
    let n = grid.len();
    let mut counts = vec![0usize; n];
    let mut sums = vec![0.0f64; n];
    for t in tweets {
        if let Some(k) = grid.bucket(t.timestamp) {
            counts[k] += 1;
            sums[k] += t.compound.unwrap_or_else(|| scorer.score(&t.text));
        }
    }
    let volume = counts.iter().map(|&c| Some(c as f64)).collect();
    let sentiment = counts
        .iter()
        .zip(&sums)
        .map(|(&c, &s)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok((UniformSeries::on_grid(grid, volume)?, UniformSeries::on_grid(grid, sentiment)?))
}

/// Causal exponential smoothing with weight `2/(span+1)` on the newest
/// observation, seeded with the first observation. A gap repeats the previous
/// smoothed value; leading gaps stay gaps.
pub fn ewma(series: &UniformSeries, span: usize) -> Result<UniformSeries> {
    if span < 1 {
        return Err(Error::invalid("EWMA span must be at least 1"));
    }
    let alpha = 2.0 / (span as f64 + 1.0);
    let mut state: Option<f64> = None;
    let values = series
        .values
        .iter()
        .map(|v| {
            state = match (state, *v) {
                (None, x) => x,
                (Some(prev), None) => Some(prev),
                (Some(prev), Some(x)) => Some(alpha * x + (1.0 - alpha) * prev),
            };
            state
        })
        .collect();
    UniformSeries::new(series.start, series.interval, values)
}

/// Piecewise-linear interpolation of hourly knots onto the grid. Knots must be
/// strictly increasing in time; grid points outside the knot range are gaps.
pub fn upsample_linear(knots: &[TrendsRecord], grid: &Grid) -> Result<UniformSeries> {
    if knots.len() < 2 {
        return Err(Error::TooFewKnots);
    }
    if knots.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
        return Err(Error::invalid("knot timestamps must be strictly increasing"));
    }
    let mut seg = 0;
    let values = grid
        .instants()
        .map(|t| {
            if t < knots[0].timestamp || t > knots[knots.len() - 1].timestamp {
                return None;
            }
            while knots[seg + 1].timestamp < t {
                seg += 1;
            }
            let (a, b) = (knots[seg], knots[seg + 1]);
            if t == a.timestamp {
                return Some(a.value);
            }
            if t == b.timestamp {
                return Some(b.value);
            }
            let w = (t - a.timestamp) as f64 / (b.timestamp - a.timestamp) as f64;
            Some(a.value + w * (b.value - a.value))
        })
        .collect();
    UniformSeries::on_grid(grid, values)
}

/// Samples an irregular `(timestamp, value)` series onto the grid with the
/// last observation at or before each instant, no older than `max_age`
/// seconds. Input must be sorted by timestamp.
pub fn sample_last(points: &[(Timestamp, f64)], grid: &Grid, max_age: i64) -> Result<UniformSeries> {
    let mut cursor = 0;
    let mut last: Option<(Timestamp, f64)> = None;
    let values = grid
        .instants()
        .map(|t| {
            while cursor < points.len() && points[cursor].0 <= t {
                last = Some(points[cursor]);
                cursor += 1;
            }
            last.filter(|(ts, _)| t - ts <= max_age).map(|(_, v)| v)
        })
        .collect();
    UniformSeries::on_grid(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::{HOUR, MINUTE};

    fn lexicon() -> Lexicon {
        let mut m = BTreeMap::new();
        m.insert("good".to_string(), 2.0);
        m.insert("bad".to_string(), -2.5);
        m.insert("moon".to_string(), 1.5);
        Lexicon::new(m, DEFAULT_ALPHA).unwrap()
    }

    fn tweet(ts: Timestamp, compound: Option<f64>) -> TweetRecord {
        TweetRecord {
            timestamp: ts,
            text: "x".to_string(),
            is_retweet: false,
            compound,
        }
    }

    #[test]
    fn compound_examples() {
        let lex = lexicon();
        assert_eq!(compound_score("", &lex), 0.0);
        assert_eq!(compound_score("nothing matches", &lex), 0.0);
        let one = compound_score("Good!", &lex);
        assert!((one - 2.0 / libm::sqrt(19.0)).abs() < 1e-15);
        let two = compound_score("good good", &lex);
        assert!(two > one && two < 1.0);
        assert!(compound_score("bad news", &lex) < 0.0);
    }

    #[test]
    fn lexicon_tsv_parsing() {
        let lex = Lexicon::from_tsv("# comment\ngood\t2.0\nBAD\t-2.5\n\n", 15.0).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.valence("bad"), Some(-2.5));
        assert!(Lexicon::from_tsv("awful\t-9", 15.0).is_err());
        assert!(Lexicon::from_tsv("missing-tab", 15.0).is_err());
        assert!(Lexicon::from_tsv("", 0.0).is_err());
    }

    #[test]
    fn aggregate_symmetric_bucket_and_empty_bucket() {
        let grid = Grid::new(0, 10 * MINUTE, 5 * MINUTE).unwrap();
        let tweets = [tweet(0, Some(0.5)), tweet(60, Some(0.0)), tweet(120, Some(-0.5))];
        let (vol, sent) = aggregate_tweets(&tweets, &lexicon(), &grid).unwrap();
        assert_eq!(vol.values, vec![Some(3.0), Some(0.0)]);
        assert_eq!(sent.values, vec![Some(0.0), None]);
    }

    #[test]
    fn ewma_constant_is_fixed_point() {
        let s = UniformSeries::dense(0, 300, vec![3.5; 40]).unwrap();
        let e = ewma(&s, 12).unwrap();
        assert!(e.values.iter().all(|v| *v == Some(3.5)));
    }

    #[test]
    fn ewma_step_response_matches_closed_form() {
        // Zero before the step, one from the step on.
        let mut raw = vec![0.0];
        raw.extend(core::iter::repeat(1.0).take(30));
        let e = ewma(&UniformSeries::dense(0, 300, raw).unwrap(), 12).unwrap();
        let decay = 1.0 - 2.0 / 13.0;
        for k in 0..30 {
            let closed = 1.0 - libm::pow(decay, (k + 1) as f64);
            assert!((e.values[k + 1].unwrap() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn ewma_gaps_hold_previous_value() {
        let s = UniformSeries::new(0, 300, vec![None, Some(1.0), None, Some(2.0)]).unwrap();
        let e = ewma(&s, 1).unwrap();
        assert_eq!(e.values, vec![None, Some(1.0), Some(1.0), Some(2.0)]);
        assert!(ewma(&s, 0).is_err());
    }

    #[test]
    fn upsample_midpoint_and_knots() {
        let knots = [
            TrendsRecord { timestamp: 0, value: 40.0 },
            TrendsRecord { timestamp: HOUR, value: 60.0 },
        ];
        let grid = Grid::new(0, HOUR + 10 * MINUTE, 5 * MINUTE).unwrap();
        let s = upsample_linear(&knots, &grid).unwrap();
        assert_eq!(s.values[0], Some(40.0));
        assert_eq!(s.values[6], Some(50.0));
        assert_eq!(s.values[12], Some(60.0));
        assert_eq!(s.values[13], None);
        assert_eq!(upsample_linear(&knots[..1], &grid), Err(Error::TooFewKnots));
    }

    #[test]
    fn sample_last_respects_max_age() {
        let grid = Grid::new(0, 4 * HOUR, HOUR).unwrap();
        let s = sample_last(&[(10, 1.0), (HOUR + 5, 2.0)], &grid, HOUR).unwrap();
        assert_eq!(s.values, vec![None, Some(1.0), Some(2.0), None]);
    }
}
