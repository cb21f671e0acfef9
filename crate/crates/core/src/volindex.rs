//! Seven-day implied-volatility index from weekly option chains.
//!
//! Each expiry contributes a model-free variance estimate built from the
//! out-of-the-money strip around the put-call-parity forward; the near and
//! next weekly expiries are then blended in total-variance space to a fixed
//! 7-day maturity and annualised.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{OptionQuoteRecord, Side};
use crate::series::UniformSeries;
use crate::time::{next_weekly_expiry, Grid, Timestamp, MINUTE, WEEK, YEAR_MINUTES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexParams {
    /// Continuously compounded risk-free rate per year.
    pub risk_free_rate: f64,
    /// Constant maturity of the index in minutes (7 days).
    pub target_maturity_minutes: f64,
    pub min_quotes_per_expiry: usize,
    /// Quotes older than this at an evaluation instant are ignored.
    pub staleness_minutes: i64,
    /// Stop walking away from K0 after two consecutive zero bids.
    pub zero_bid_truncation: bool,
    /// Subtract the next-term weighted variance instead of adding it. Only
    /// useful for auditing the formula as printed in the source methodology.
    pub eq2_minus: bool,
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams {
            risk_free_rate: 0.0,
            target_maturity_minutes: 7.0 * 1440.0,
            min_quotes_per_expiry: 3,
            staleness_minutes: 60,
            zero_bid_truncation: false,
            eq2_minus: false,
        }
    }
}

impl IndexParams {
    pub const YEAR_MINUTES: f64 = YEAR_MINUTES;

    pub fn validate(&self) -> Result<()> {
        if !(self.target_maturity_minutes > 0.0) {
            return Err(Error::invalid("target maturity must be positive"));
        }
        if !self.risk_free_rate.is_finite() {
            return Err(Error::invalid("risk-free rate must be finite"));
        }
        if self.staleness_minutes < 0 {
            return Err(Error::invalid("staleness horizon must be non-negative"));
        }
        Ok(())
    }
}

/// Bid and ask for one side of one strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideQuote {
    pub bid: f64,
    pub ask: f64,
}

impl SideQuote {
    /// A quote whose bid and ask both sit at `mid`.
    pub fn at_mid(mid: f64) -> Self {
        SideQuote { bid: mid, ask: mid }
    }

    /// Midpoint, or `None` for a zero bid.
    pub fn usable_mid(&self) -> Option<f64> {
        (self.bid > 0.0).then(|| 0.5 * (self.bid + self.ask))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrikeEntry {
    pub strike: f64,
    pub call: Option<SideQuote>,
    pub put: Option<SideQuote>,
}

impl StrikeEntry {
    pub fn call_mid(&self) -> Option<f64> {
        self.call.and_then(|q| q.usable_mid())
    }

    pub fn put_mid(&self) -> Option<f64> {
        self.put.and_then(|q| q.usable_mid())
    }

    fn side(&self, side: Side) -> Option<SideQuote> {
        match side {
            Side::Call => self.call,
            Side::Put => self.put,
        }
    }
}

/// Every usable quote for one expiry at one evaluation instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpirySlice {
    pub eval_time: Timestamp,
    pub expiry: Timestamp,
    entries: Vec<StrikeEntry>,
}

impl ExpirySlice {
    /// Entries must have strictly increasing positive strikes.
    pub fn new(eval_time: Timestamp, expiry: Timestamp, entries: Vec<StrikeEntry>) -> Result<Self> {
        if expiry <= eval_time {
            return Err(Error::invalid("expiry must be after the evaluation instant"));
        }
        if entries.iter().any(|e| !(e.strike > 0.0) || !e.strike.is_finite()) {
            return Err(Error::invalid("strikes must be positive and finite"));
        }
        if entries.windows(2).any(|w| w[0].strike >= w[1].strike) {
            return Err(Error::invalid("strikes must be strictly increasing"));
        }
        Ok(ExpirySlice {
            eval_time,
            expiry,
            entries,
        })
    }

    /// Builds a slice from `(strike, call_mid, put_mid)` triples.
    pub fn from_mids(
        eval_time: Timestamp,
        expiry: Timestamp,
        mids: &[(f64, Option<f64>, Option<f64>)],
    ) -> Result<Self> {
        let entries = mids
            .iter()
            .map(|&(strike, c, p)| StrikeEntry {
                strike,
                call: c.map(SideQuote::at_mid),
                put: p.map(SideQuote::at_mid),
            })
            .collect();
        Self::new(eval_time, expiry, entries)
    }

    pub fn entries(&self) -> &[StrikeEntry] {
        &self.entries
    }

    pub fn seconds_to_expiry(&self) -> i64 {
        self.expiry - self.eval_time
    }

    pub fn years_to_expiry(&self) -> f64 {
        self.seconds_to_expiry() as f64 / (YEAR_MINUTES * MINUTE as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardLevel {
    pub forward: f64,
    /// Largest listed strike at or below the forward.
    pub k0: f64,
    /// Strike where |call - put| is smallest.
    pub parity_strike: f64,
}

/// Forward from put-call parity at the strike with the smallest call/put gap.
pub fn forward_price(slice: &ExpirySlice, params: &IndexParams) -> Result<ForwardLevel> {
    let growth = libm::exp(params.risk_free_rate * slice.years_to_expiry());
    let mut best: Option<(f64, f64, f64)> = None; // (|c - p|, strike, c - p)
    for e in slice.entries() {
        if let (Some(c), Some(p)) = (e.call_mid(), e.put_mid()) {
            let gap = libm::fabs(c - p);
            if best.map_or(true, |(g, _, _)| gap < g) {
                best = Some((gap, e.strike, c - p));
            }
        }
    }
    let (_, parity_strike, diff) = best.ok_or(Error::NoParityStrike)?;
    let forward = parity_strike + growth * diff;
    let entries = slice.entries();
    let k0 = entries
        .iter()
        .rev()
        .find(|e| e.strike <= forward)
        .unwrap_or(&entries[0])
        .strike;
    Ok(ForwardLevel {
        forward,
        k0,
        parity_strike,
    })
}

/// One expiry's variance estimate and the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceContribution {
    /// Annualised variance.
    pub sigma_sq: f64,
    /// Time to expiry in years.
    pub t_years: f64,
    pub minutes_to_expiry: f64,
    pub forward: f64,
    pub k0: f64,
    pub strikes_used: usize,
}

/// Out-of-the-money strip used by the variance sum: puts below K0, calls
/// above, the call/put average at K0.
fn otm_strip(slice: &ExpirySlice, k0: f64, truncate: bool) -> Vec<(f64, f64)> {
    let entries = slice.entries();
    let k0_pos = entries.iter().position(|e| e.strike == k0).unwrap_or(0);

    let walk = |iter: &mut dyn Iterator<Item = &StrikeEntry>, side: Side, out: &mut Vec<(f64, f64)>| {
        let mut zero_run = 0;
        for e in iter {
            let Some(q) = e.side(side) else { continue };
            match q.usable_mid() {
                Some(m) => {
                    zero_run = 0;
                    out.push((e.strike, m));
                }
                None => {
                    zero_run += 1;
                    if truncate && zero_run >= 2 {
                        break;
                    }
                }
            }
        }
    };

    let mut strip = Vec::with_capacity(entries.len());
    walk(&mut entries[..k0_pos].iter().rev(), Side::Put, &mut strip);
    strip.reverse();
    let at = &entries[k0_pos];
    match (at.call_mid(), at.put_mid()) {
        (Some(c), Some(p)) => strip.push((at.strike, 0.5 * (c + p))),
        (Some(m), None) | (None, Some(m)) => strip.push((at.strike, m)),
        (None, None) => {}
    }
    walk(&mut entries[k0_pos + 1..].iter(), Side::Call, &mut strip);
    strip
}

/// Per-expiry variance:
/// `(2/T) Σ ΔK/K² e^{RT} Q(K) − (1/T)(F/K0 − 1)²`.
pub fn variance_contribution(slice: &ExpirySlice, params: &IndexParams) -> Result<VarianceContribution> {
    let level = forward_price(slice, params)?;
    let strip = otm_strip(slice, level.k0, params.zero_bid_truncation);
    let required = params.min_quotes_per_expiry.max(2);
    if strip.len() < required {
        return Err(Error::InsufficientQuotes {
            found: strip.len(),
            required,
        });
    }

    let t = slice.years_to_expiry();
    let growth = libm::exp(params.risk_free_rate * t);
    let n = strip.len();
    let mut sum = 0.0;
    for i in 0..n {
        let k = strip[i].0;
        let dk = if i == 0 {
            strip[1].0 - k
        } else if i == n - 1 {
            k - strip[n - 2].0
        } else {
            0.5 * (strip[i + 1].0 - strip[i - 1].0)
        };
        sum += dk / (k * k) * growth * strip[i].1;
    }
    let skew = level.forward / level.k0 - 1.0;
    let sigma_sq = 2.0 / t * sum - skew * skew / t;

    Ok(VarianceContribution {
        sigma_sq,
        t_years: t,
        minutes_to_expiry: libm::round(slice.seconds_to_expiry() as f64 / MINUTE as f64),
        forward: level.forward,
        k0: level.k0,
        strikes_used: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    /// Index level in volatility points; 0 when the radicand was clamped.
    pub value: f64,
    pub radicand: f64,
    pub clamped: bool,
}

/// Blends near and next variance to the constant maturity and annualises:
/// `100 √{[T1σ1² w1 + T2σ2² w2] · N365/N7}`, with
/// `w1 = (N_T2 − N7)/(N_T2 − N_T1)` and `w2 = (N7 − N_T1)/(N_T2 − N_T1)`.
pub fn interpolate_index(
    near: &VarianceContribution,
    next: &VarianceContribution,
    params: &IndexParams,
) -> Result<IndexValue> {
    let n1 = near.minutes_to_expiry;
    let n2 = next.minutes_to_expiry;
    let n7 = params.target_maturity_minutes;
    if n1 == n2 {
        return Err(Error::DegenerateTerms);
    }
    if !(n1 > 0.0 && n2 > n1) {
        return Err(Error::invalid("near term must expire before next term"));
    }
    let w1 = (n2 - n7) / (n2 - n1);
    let w2 = (n7 - n1) / (n2 - n1);
    let near_term = near.t_years * near.sigma_sq * w1;
    let next_term = next.t_years * next.sigma_sq * w2;
    let blended = if params.eq2_minus {
        near_term - next_term
    } else {
        near_term + next_term
    };
    let radicand = blended * (YEAR_MINUTES / n7);
    if radicand < 0.0 || radicand.is_nan() {
        return Ok(IndexValue {
            value: 0.0,
            radicand,
            clamped: true,
        });
    }
    Ok(IndexValue {
        value: 100.0 * libm::sqrt(radicand),
        radicand,
        clamped: false,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub points: usize,
    pub gaps: usize,
    pub clamped_radicands: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VxbtSeries {
    pub series: UniformSeries,
    /// Parity-implied forward of the near-term expiry, a stand-in for the
    /// underlying price where no index feed is supplied.
    pub forward: UniformSeries,
    pub report: IndexReport,
}

type InstrumentKey = (Timestamp, u64, Side);

fn instrument_key(q: &OptionQuoteRecord) -> InstrumentKey {
    // Positive finite floats order like their bit patterns.
    (q.expiry, q.strike.to_bits(), q.side)
}

/// Slice for `expiry` from the latest quote per instrument, skipping quotes
/// older than the staleness horizon.
fn slice_from_book(
    book: &BTreeMap<InstrumentKey, OptionQuoteRecord>,
    eval_time: Timestamp,
    expiry: Timestamp,
    staleness: i64,
) -> Result<ExpirySlice> {
    let mut entries: Vec<StrikeEntry> = Vec::new();
    let lo = (expiry, 0u64, Side::Call);
    let hi = (expiry, u64::MAX, Side::Put);
    for (_, q) in book.range(lo..=hi) {
        if eval_time - q.timestamp > staleness {
            continue;
        }
        let sq = SideQuote {
            bid: q.bid,
            ask: q.ask,
        };
        match entries.last_mut() {
            Some(e) if e.strike == q.strike => match q.side {
                Side::Call => e.call = Some(sq),
                Side::Put => e.put = Some(sq),
            },
            _ => entries.push(StrikeEntry {
                strike: q.strike,
                call: (q.side == Side::Call).then_some(sq),
                put: (q.side == Side::Put).then_some(sq),
            }),
        }
    }
    ExpirySlice::new(eval_time, expiry, entries)
}

fn index_at(
    book: &BTreeMap<InstrumentKey, OptionQuoteRecord>,
    t: Timestamp,
    params: &IndexParams,
) -> Result<(IndexValue, f64)> {
    let near_expiry = next_weekly_expiry(t);
    let next_expiry = near_expiry + WEEK;
    let staleness = params.staleness_minutes * MINUTE;
    let near = slice_from_book(book, t, near_expiry, staleness)?;
    let next = slice_from_book(book, t, next_expiry, staleness)?;
    let near = variance_contribution(&near, params)?;
    let next = variance_contribution(&next, params)?;
    Ok((interpolate_index(&near, &next, params)?, near.forward))
}

/// Evaluates the index at every grid instant from the near and next Friday
/// 08:00 UTC expiries strictly after that instant. Instants where either
/// expiry lacks a usable chain become gaps.
pub fn compute_vxbt_series(
    quotes: &[OptionQuoteRecord],
    grid: &Grid,
    params: &IndexParams,
) -> Result<VxbtSeries> {
    params.validate()?;
    let mut order: Vec<usize> = (0..quotes.len()).collect();
    order.sort_by_key(|&i| quotes[i].timestamp);

    let mut book: BTreeMap<InstrumentKey, OptionQuoteRecord> = BTreeMap::new();
    let mut cursor = 0;
    let mut report = IndexReport::default();
    let mut values = Vec::with_capacity(grid.len());
    let mut forwards = Vec::with_capacity(grid.len());

    for t in grid.instants() {
        while cursor < order.len() && quotes[order[cursor]].timestamp <= t {
            let q = &quotes[order[cursor]];
            if q.expiry > q.timestamp {
                book.insert(instrument_key(q), *q);
            }
            cursor += 1;
        }
        // Expired instruments can never be selected again.
        let live = book.split_off(&(t + 1, 0, Side::Call));
        book = live;

        report.points += 1;
        match index_at(&book, t, params) {
            Ok((v, forward)) => {
                if v.clamped {
                    report.clamped_radicands += 1;
                }
                values.push(Some(v.value));
                forwards.push(Some(forward));
            }
            Err(_) => {
                report.gaps += 1;
                values.push(None);
                forwards.push(None);
            }
        }
    }

    Ok(VxbtSeries {
        series: UniformSeries::on_grid(grid, values)?,
        forward: UniformSeries::on_grid(grid, forwards)?,
        report,
    })
}
