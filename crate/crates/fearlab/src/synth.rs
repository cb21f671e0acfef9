//! Synthetic input generator. A latent log-volatility follows a discretised
//! Ornstein-Uhlenbeck process, spot follows a driftless geometric random walk
//! under that volatility, and quotes, tweets, trends and the price feed are
//! all derived from the same path so that the alt-data carries some signal.

use std::collections::BTreeMap;

use fearlab_core::records::{OptionQuoteRecord, Side, TrendsRecord, TweetRecord};
use fearlab_core::time::{next_weekly_expiry, Timestamp, HOUR, YEAR_MINUTES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::config::{RunConfig, SynthConfig};
use crate::error::Result;
use crate::market_data::{self, QuoteFormat};

const POSITIVE: [&str; 6] = ["moon", "bullish", "gains", "great", "win", "pump"];
const NEGATIVE: [&str; 6] = ["crash", "fear", "dump", "loss", "panic", "bearish"];
const NEUTRAL: [&str; 8] = ["bitcoin", "btc", "price", "today", "market", "chart", "hodl", "volatility"];
const LEXICON: [(&str, f64); 12] = [
    ("moon", 2.5),
    ("bullish", 2.0),
    ("gains", 1.8),
    ("great", 3.1),
    ("win", 2.8),
    ("pump", 1.2),
    ("crash", -2.8),
    ("fear", -2.2),
    ("dump", -1.6),
    ("loss", -1.3),
    ("panic", -3.0),
    ("bearish", -2.0),
];
const STRIKE_STEPS: [f64; 7] = [10.0, 25.0, 50.0, 100.0, 250.0, 500.0, 1000.0];
/// Mean reversion of log-volatility per hour and its hourly noise.
const OU_KAPPA: f64 = 0.05;
const OU_NOISE: f64 = 0.06;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub quotes: Vec<OptionQuoteRecord>,
    pub tweets: Vec<TweetRecord>,
    pub trends: Vec<TrendsRecord>,
    pub prices: Vec<(Timestamp, f64)>,
    /// Latent annualised volatility at each grid instant.
    pub volatility: Vec<f64>,
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Undiscounted Black-Scholes price on a forward.
pub fn black_price(side: Side, forward: f64, strike: f64, sigma: f64, years: f64) -> f64 {
    let sd = sigma * years.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match side {
        Side::Call => forward * norm_cdf(d1) - strike * norm_cdf(d2),
        Side::Put => strike * norm_cdf(-d2) - forward * norm_cdf(-d1),
    }
}

fn strike_step(spot: f64, sigma: f64, years: f64, strikes: usize) -> f64 {
    let wanted = 6.0 * spot * sigma * years.sqrt() / strikes.max(2) as f64;
    STRIKE_STEPS
        .iter()
        .copied()
        .find(|s| *s >= wanted)
        .unwrap_or(STRIKE_STEPS[STRIKE_STEPS.len() - 1])
}

fn chain(
    out: &mut Vec<OptionQuoteRecord>,
    t: Timestamp,
    expiry: Timestamp,
    spot: f64,
    sigma: f64,
    strikes: usize,
) {
    let years = (expiry - t) as f64 / 60.0 / YEAR_MINUTES;
    let step = strike_step(spot, sigma, years, strikes);
    let centre = (spot / step).round() as i64;
    let half = strikes as i64 / 2;
    for k in (centre - half)..(centre - half + strikes as i64) {
        let strike = k as f64 * step;
        if strike <= 0.0 {
            continue;
        }
        for side in [Side::Call, Side::Put] {
            let fair = black_price(side, spot, strike, sigma, years);
            // Half-spread of 1% with a floor; deep wings collapse to a zero bid.
            let half_spread = (0.01 * fair).max(0.5);
            let bid = ((fair - half_spread) * 100.0).round() / 100.0;
            let ask = ((fair + half_spread) * 100.0).round() / 100.0;
            out.push(OptionQuoteRecord {
                timestamp: t,
                expiry,
                strike,
                side,
                bid: bid.max(0.0),
                ask: ask.max(0.01),
            });
        }
    }
}

fn tweet_text(rng: &mut ChaCha8Rng, mood: f64) -> String {
    let n = rng.gen_range(3..8);
    let mut words: Vec<&str> = (0..n).map(|_| *NEUTRAL.choose(rng).expect("non-empty")).collect();
    if rng.gen::<f64>() < 0.7 {
        let pool = if rng.gen::<f64>() < mood { &POSITIVE } else { &NEGATIVE };
        let at = rng.gen_range(0..=words.len());
        words.insert(at, pool.choose(rng).expect("non-empty"));
    }
    words.join(" ")
}

/// Generates every input over the configured grid. Identical seeds give
/// identical data.
pub fn generate(cfg: &RunConfig) -> SynthData {
    let params = cfg.synth.clone().unwrap_or_default();
    let SynthConfig {
        spot,
        vol_mean,
        strikes_per_expiry,
        tweets_per_interval,
        retweet_fraction,
    } = params;
    let grid = cfg.grid();
    let dt_hours = grid.interval as f64 / HOUR as f64;
    let dt_years = grid.interval as f64 / 60.0 / YEAR_MINUTES;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut log_vol = 0.0f64;
    let mut price = spot;
    let mut last_return = 0.0;
    let mut data = SynthData {
        quotes: Vec::new(),
        tweets: Vec::new(),
        trends: Vec::new(),
        prices: Vec::new(),
        volatility: Vec::with_capacity(grid.len()),
    };
    let stationary = OU_NOISE / (2.0 * OU_KAPPA).sqrt();

    for t in grid.instants() {
        let sigma = vol_mean * (log_vol - 0.5 * stationary * stationary).exp();
        data.volatility.push(sigma);
        data.prices.push((t, (price * 100.0).round() / 100.0));

        let near = next_weekly_expiry(t);
        for expiry in [near, next_weekly_expiry(near)] {
            chain(&mut data.quotes, t, expiry, price, sigma, strikes_per_expiry);
        }

        // Activity rises with volatility; mood follows the last move.
        let rate = tweets_per_interval * (sigma / vol_mean).powi(2);
        let mood = 1.0 / (1.0 + (-last_return / (sigma * dt_years.sqrt()).max(1e-12)).exp());
        let originals = sample_poisson(&mut rng, rate);
        let retweets = sample_poisson(&mut rng, rate * retweet_fraction / (1.0 - retweet_fraction).max(1e-9));
        for _ in 0..originals {
            let at = t + rng.gen_range(0..grid.interval);
            let text = tweet_text(&mut rng, mood);
            data.tweets.push(TweetRecord {
                timestamp: at,
                text,
                is_retweet: false,
                compound: None,
            });
        }
        for _ in 0..retweets {
            let at = t + rng.gen_range(0..grid.interval);
            let text = format!("RT @trader: {}", tweet_text(&mut rng, mood));
            let flagged = rng.gen::<bool>();
            data.tweets.push(TweetRecord {
                timestamp: at,
                text,
                is_retweet: flagged,
                compound: None,
            });
        }

        let z: f64 = normal.sample(&mut rng);
        last_return = sigma * dt_years.sqrt() * z - 0.5 * sigma * sigma * dt_years;
        price *= last_return.exp();
        let e: f64 = normal.sample(&mut rng);
        log_vol += -OU_KAPPA * log_vol * dt_hours + OU_NOISE * dt_hours.sqrt() * e;
    }
    data.tweets.sort_by_key(|t| t.timestamp);

    // Hourly search interest tracks volatility, scaled so the peak is 100.
    let step = (HOUR / grid.interval).max(1) as usize;
    let first = grid.instant(0);
    let knots: Vec<(Timestamp, f64)> = (0..=grid.len().div_ceil(step))
        .map(|h| {
            let k = (h * step).min(grid.len() - 1);
            (first + h as i64 * HOUR, data.volatility[k])
        })
        .collect();
    let peak = knots.iter().map(|k| k.1).fold(f64::MIN, f64::max);
    data.trends = knots
        .into_iter()
        .map(|(timestamp, v)| TrendsRecord {
            timestamp,
            value: (100.0 * v / peak).round().clamp(0.0, 100.0),
        })
        .collect();
    data
}

fn sample_poisson(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub quotes: usize,
    pub tweets: usize,
    pub trend_knots: usize,
    pub written: Vec<std::path::PathBuf>,
}

/// Writes the generated inputs to the paths named in the config.
pub fn write_inputs(cfg: &RunConfig) -> Result<SynthSummary> {
    let data = generate(cfg);
    let inputs = &cfg.inputs;
    let mut written = Vec::new();
    let mut target = |p: &std::path::Path| -> Result<std::path::PathBuf> {
        let path = cfg.resolve(p);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| crate::error::FearlabError::io(dir, e))?;
        }
        written.push(path.clone());
        Ok(path)
    };
    let quotes = target(&inputs.quotes)?;
    market_data::write_quotes(&quotes, &data.quotes, QuoteFormat::from_path(&quotes))?;
    market_data::write_tweets(&target(&inputs.tweets)?, &data.tweets)?;
    market_data::write_trends(&target(&inputs.trends)?, &data.trends)?;
    if let Some(p) = &inputs.index_prices {
        market_data::write_index_prices(&target(p)?, &data.prices)?;
    }
    if let Some(p) = &inputs.lexicon {
        let text: String = LEXICON.iter().map(|(w, v)| format!("{w}\t{v}\n")).collect();
        crate::formats::write_text(&target(p)?, &text)?;
    }
    Ok(SynthSummary {
        quotes: data.quotes.len(),
        tweets: data.tweets.len(),
        trend_knots: data.trends.len(),
        written,
    })
}

/// The lexicon written alongside synthetic tweets.
pub fn lexicon_entries() -> BTreeMap<String, f64> {
    LEXICON.iter().map(|(w, v)| (w.to_string(), *v)).collect()
}
