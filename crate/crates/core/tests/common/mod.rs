#![allow(dead_code)]

use fearlab_core::dataset::{FeatureName, LabeledDataset};
use fearlab_core::records::{OptionQuoteRecord, Side};
use fearlab_core::series::{Direction, DirectionSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIVE_MIN: i64 = 300;
/// 2019-05-03 08:00 UTC, a Friday expiry.
pub const FRIDAY_0800: i64 = 1_556_870_400;

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Undiscounted Black-Scholes on the forward (zero rates).
pub fn bs_price(forward: f64, strike: f64, sigma: f64, t_years: f64, side: Side) -> f64 {
    let sd = sigma * t_years.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match side {
        Side::Call => forward * norm_cdf(d1) - strike * norm_cdf(d2),
        Side::Put => strike * norm_cdf(-d2) - forward * norm_cdf(-d1),
    }
}

/// Log-spaced strikes covering +-`sds` standard deviations at maturity.
pub fn strike_ladder(forward: f64, sigma: f64, t_years: f64, sds: f64, count: usize) -> Vec<f64> {
    let half = sds * sigma * t_years.sqrt();
    (0..count)
        .map(|i| {
            let u = -half + 2.0 * half * i as f64 / (count - 1) as f64;
            (forward * u.exp() * 100.0).round() / 100.0
        })
        .collect()
}

/// Quotes for every strike and side of one expiry at `ts`, bid/ask +-1%.
pub fn bs_quotes(
    ts: i64,
    expiry: i64,
    forward: f64,
    sigma: f64,
    strikes: &[f64],
) -> Vec<OptionQuoteRecord> {
    let t = (expiry - ts) as f64 / (525_600.0 * 60.0);
    let mut out = Vec::with_capacity(strikes.len() * 2);
    for &k in strikes {
        for side in [Side::Call, Side::Put] {
            let p = bs_price(forward, k, sigma, t, side);
            out.push(OptionQuoteRecord {
                timestamp: ts,
                expiry,
                strike: k,
                side,
                bid: p * 0.99,
                ask: p * 1.01,
            });
        }
    }
    out
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Direction> {
    (0..n).map(|_| Direction::from_index(rng.gen_range(0..3))).collect()
}

pub fn direction_series(labels: Vec<Direction>) -> DirectionSeries {
    DirectionSeries {
        start: FRIDAY_0800,
        interval: FIVE_MIN,
        labels,
    }
}

pub const SERIES: [&str; 5] = ["vxbt", "index", "volume", "sentiment", "trends"];

/// Five i.i.d. uniform direction series, except that the vxbt direction at
/// `t + 1` equals the trends direction at `t - 3`.
pub fn planted_directions(len: usize, seed: u64) -> Vec<(String, DirectionSeries)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<Vec<Direction>> = (0..5).map(|_| random_labels(&mut rng, len)).collect();
    for t in 4..len {
        all[0][t] = all[4][t - 4];
    }
    SERIES
        .iter()
        .zip(all)
        .map(|(n, l)| (n.to_string(), direction_series(l)))
        .collect()
}

pub fn random_directions(len: usize, seed: u64) -> Vec<(String, DirectionSeries)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SERIES
        .iter()
        .map(|n| (n.to_string(), direction_series(random_labels(&mut rng, len))))
        .collect()
}

/// Three isotropic Gaussian blobs in the plane with unit spread.
pub fn blobs(n: usize, seed: u64) -> LabeledDataset {
    let centers = [(-4.0, 0.0), (4.0, 0.0), (0.0, 6.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % 3;
        x.push(centers[k].0 + gauss());
        x.push(centers[k].1 + gauss());
        y.push(Direction::from_index(k));
    }
    let names = (0..2)
        .map(|lag| FeatureName {
            series: "blob".into(),
            lag,
        })
        .collect();
    LabeledDataset::new(names, x, y, (0..n as i64).collect()).unwrap()
}

pub fn accuracy(truth: &[Direction], predicted: &[Direction]) -> f64 {
    truth.iter().zip(predicted).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Flat-volatility quote stream for every weekly expiry needed between
/// `start` and `end`, refreshed every `refresh` seconds. Each expiry lists a
/// fixed strike ladder covering +-6 standard deviations as seen at `start`.
pub fn flat_vol_stream(start: i64, end: i64, forward: f64, sigma: f64, refresh: i64) -> Vec<OptionQuoteRecord> {
    use fearlab_core::time::{next_weekly_expiry, WEEK};
    let first = next_weekly_expiry(start);
    let last = next_weekly_expiry(end) + WEEK;
    let mut expiries = vec![];
    let mut e = first;
    while e <= last {
        expiries.push(e);
        e += WEEK;
    }
    let ladders: Vec<Vec<f64>> = expiries
        .iter()
        .map(|&e| {
            let t = (e - start) as f64 / (525_600.0 * 60.0);
            strike_ladder(forward, sigma, t, 6.0, 201)
        })
        .collect();
    let mut out = vec![];
    let mut ts = start - refresh;
    while ts < end {
        for (e, ladder) in expiries.iter().zip(&ladders) {
            if *e > ts {
                out.extend(bs_quotes(ts, *e, forward, sigma, ladder));
            }
        }
        ts += refresh;
    }
    out
}
