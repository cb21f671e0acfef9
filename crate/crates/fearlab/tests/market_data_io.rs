use std::fs;
use std::path::{Path, PathBuf};

use fearlab::market_data::{
    parse_index_prices, parse_quotes, parse_trends, parse_tweets, write_index_prices, write_quotes,
    write_trends, write_tweets, QuoteFormat,
};
use fearlab::FearlabError;
use fearlab_core::{OptionQuoteRecord, Side, TrendsRecord, TweetRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T0: i64 = 1_556_668_800; // 2019-05-01T00:00:00Z

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn random_quotes(n: usize, seed: u64) -> Vec<OptionQuoteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<OptionQuoteRecord> = (0..n)
        .map(|_| {
            let timestamp = T0 + rng.gen_range(0..86_400);
            let bid = (rng.gen_range(0.0..500.0f64) * 100.0).round() / 100.0;
            OptionQuoteRecord {
                timestamp,
                expiry: timestamp + rng.gen_range(60..2_000_000),
                strike: rng.gen_range(1..400) as f64 * 50.0,
                side: if rng.gen() { Side::Call } else { Side::Put },
                bid,
                ask: bid + rng.gen_range(0.0..20.0f64),
            }
        })
        .collect();
    out.sort_by_key(|q| q.timestamp);
    out
}

#[test]
fn quotes_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let quotes = random_quotes(1000, 1);
    for (name, format) in [("q.csv", QuoteFormat::Csv), ("q.jsonl", QuoteFormat::Jsonl)] {
        let path = dir.path().join(name);
        assert_eq!(QuoteFormat::from_path(&path), format);
        write_quotes(&path, &quotes, format).unwrap();
        let back = parse_quotes(&path, format).unwrap();
        assert_eq!(back.rows, 1000);
        assert!(back.rejected.is_empty());
        assert_eq!(back.records, quotes, "{name}");
    }
}

#[test]
fn valid_row_accepted_and_crossed_row_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("timestamp,expiry,strike,side,bid,ask\n");
    text.push_str("2019-05-01T00:00:00Z,2019-05-03T08:00:00Z,9000,C,0.01,0.02\n");
    for i in 0..20 {
        text.push_str(&format!("2019-05-01T00:{i:02}:00Z,2019-05-03T08:00:00Z,9000,P,1.0,1.5\n"));
    }
    text.push_str("2019-05-01T01:00:00Z,2019-05-03T08:00:00Z,9000,C,0.02,0.01\n");
    let path = write(dir.path(), "q.csv", &text);
    let got = parse_quotes(&path, QuoteFormat::Csv).unwrap();
    assert_eq!(got.rows, 22);
    assert_eq!(got.records.len(), 21);
    assert_eq!(got.records[0].bid, 0.01);
    assert_eq!(got.records[0].side, Side::Call);
    assert_eq!(got.rejected.len(), 1);
    assert_eq!(got.rejected[0].line, 23);
    assert!(got.rejected[0].reason.contains("ask below bid"));
}

#[test]
fn too_many_malformed_rows_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("timestamp,expiry,strike,side,bid,ask\n");
    for i in 0..8 {
        text.push_str(&format!("2019-05-01T00:0{i}:00Z,2019-05-03T08:00:00Z,9000,C,1,2\n"));
    }
    text.push_str("garbage,2019-05-03T08:00:00Z,9000,C,1,2\n");
    text.push_str("2019-05-01T00:00:00Z,2019-05-03T08:00:00Z,9000,X,1,2\n");
    let path = write(dir.path(), "q.csv", &text);
    match parse_quotes(&path, QuoteFormat::Csv) {
        Err(e @ FearlabError::TooManyMalformed { bad: 2, total: 10, .. }) => assert_eq!(e.exit_code(), 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_schema_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "q.csv", "time,strike\n1,2\n");
    assert!(matches!(
        parse_quotes(&csv, QuoteFormat::Csv),
        Err(FearlabError::UnknownSchema { .. })
    ));
    let jsonl = write(dir.path(), "q.jsonl", "{\"ts\": 1, \"k\": 2}\n");
    assert!(matches!(
        parse_quotes(&jsonl, QuoteFormat::Jsonl),
        Err(FearlabError::UnknownSchema { .. })
    ));
    let missing = dir.path().join("nope.csv");
    let err = parse_quotes(&missing, QuoteFormat::Csv).unwrap_err();
    assert!(matches!(err, FearlabError::Io { .. }));
    assert_eq!(err.exit_code(), 2);
}

fn tweet_line(ts: &str, text: &str, rt: bool) -> String {
    serde_json::json!({ "timestamp": ts, "text": text, "is_retweet": rt }).to_string() + "\n"
}

#[test]
fn retweet_token_rule() {
    let dir = tempfile::tempdir().unwrap();
    let text = tweet_line("2019-05-01T00:02:00Z", "RT @user great coin", false)
        + &tweet_line("2019-05-01T00:01:00Z", "no shoRTage of coins", false)
        + &tweet_line("2019-05-01T00:00:00Z", "plain", false);
    let path = write(dir.path(), "t.jsonl", &text);
    let got = parse_tweets(&path).unwrap();
    assert_eq!(got.retweets, 1);
    let texts: Vec<&str> = got.tweets.records.iter().map(|t| t.text.as_str()).collect();
    assert_eq!(texts, ["plain", "no shoRTage of coins"]);
}

#[test]
fn thirty_flagged_of_hundred_leave_seventy() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut flags: Vec<bool> = (0..100).map(|i| i < 30).collect();
    rand::seq::SliceRandom::shuffle(flags.as_mut_slice(), &mut rng);
    let text: String = flags
        .iter()
        .enumerate()
        .map(|(i, &rt)| tweet_line(&format!("2019-05-01T{:02}:{:02}:00Z", i / 60, i % 60), "hello", rt))
        .collect();
    let path = write(dir.path(), "t.jsonl", &text);
    let got = parse_tweets(&path).unwrap();
    assert_eq!(got.tweets.records.len(), 70);
    assert_eq!(got.retweets, 30);
    assert!(got.tweets.records.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));

    // Writing the survivors and reading them back changes nothing.
    let again = dir.path().join("again.jsonl");
    write_tweets(&again, &got.tweets.records).unwrap();
    let second = parse_tweets(&again).unwrap();
    assert_eq!(second.tweets.records, got.tweets.records);
    assert_eq!(second.retweets, 0);
}

#[test]
fn tweet_without_timestamp_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t.jsonl", "{\"text\": \"hi\"}\n");
    match parse_tweets(&path) {
        Err(FearlabError::Invalid { line: 1, message, .. }) => assert!(message.contains("timestamp")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn trends_range_duplicates_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(
        dir.path(),
        "g.csv",
        "timestamp,value\n2019-05-01T00:00:00Z,100\n2019-05-01T01:00:00Z,25\n2019-05-01T04:00:00Z,0\n",
    );
    let got = parse_trends(&ok).unwrap();
    assert_eq!(got.records.len(), 3);
    assert_eq!(got.records[0].fraction_of_peak(), 1.0);
    assert_eq!(got.records[1].fraction_of_peak(), 0.25);
    assert_eq!(got.gaps, vec![(T0 + 3600, T0 + 4 * 3600)]);

    let high = write(dir.path(), "h.csv", "timestamp,value\n2019-05-01T00:00:00Z,101\n");
    assert!(matches!(parse_trends(&high), Err(FearlabError::Invalid { line: 2, .. })));
    let dup = write(
        dir.path(),
        "d.csv",
        "timestamp,value\n2019-05-01T00:00:00Z,1\n2019-05-01T00:00:00Z,2\n",
    );
    assert!(matches!(parse_trends(&dup), Err(FearlabError::Invalid { .. })));
}

#[test]
fn trends_and_prices_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let knots: Vec<TrendsRecord> = (0..48)
        .map(|h| TrendsRecord {
            timestamp: T0 + h * 3600,
            value: ((h * 7) % 101) as f64,
        })
        .collect();
    let g = dir.path().join("g.csv");
    write_trends(&g, &knots).unwrap();
    assert_eq!(parse_trends(&g).unwrap().records, knots);

    let prices: Vec<(i64, f64)> = (0..100).map(|k| (T0 + 60 * k, 9000.0 + k as f64 * 0.37)).collect();
    let p = dir.path().join("p.csv");
    write_index_prices(&p, &prices).unwrap();
    assert_eq!(parse_index_prices(&p).unwrap(), prices);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tweet_text_survives_round_trip(texts in prop::collection::vec("[a-zA-Z0-9 ,.!?'\"\\\\é]{1,40}", 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let tweets: Vec<TweetRecord> = texts
            .iter()
            .filter(|t| !t.trim().is_empty() && !fearlab_core::records::contains_rt_token(t))
            .enumerate()
            .map(|(i, t)| TweetRecord { timestamp: T0 + i as i64, text: t.clone(), is_retweet: false, compound: None })
            .collect();
        let path = dir.path().join("t.jsonl");
        write_tweets(&path, &tweets).unwrap();
        prop_assert_eq!(parse_tweets(&path).unwrap().tweets.records, tweets);
    }
}
