use std::collections::BTreeMap;

use fearlab_core::records::{filter_retweets, TrendsRecord, TweetRecord};
use fearlab_core::series::UniformSeries;
use fearlab_core::signals::*;
use fearlab_core::time::{Grid, HOUR, MINUTE};
use proptest::prelude::*;

fn lexicon() -> Lexicon {
    let words = [("good", 1.9), ("great", 3.1), ("bad", -2.5), ("crash", -3.0), ("moon", 1.5), ("fear", -2.2)];
    let m: BTreeMap<String, f64> = words.iter().map(|(w, v)| (w.to_string(), *v)).collect();
    Lexicon::new(m, DEFAULT_ALPHA).unwrap()
}

fn word() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["good", "great", "bad", "crash", "moon", "fear", "btc", "the", "to"])
}

/// Direct evaluation of the interpolant at one instant.
fn interpolate_at(knots: &[(i64, f64)], t: i64) -> Option<f64> {
    for w in knots.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t0 <= t && t <= t1 {
            let u = (t - t0) as f64 / (t1 - t0) as f64;
            return Some(v0 * (1.0 - u) + v1 * u);
        }
    }
    None
}

fn knots() -> impl Strategy<Value = Vec<(i64, f64)>> {
    prop::collection::vec(0.0f64..=100.0, 2..30)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, x)| (i as i64 * HOUR, x)).collect())
}

proptest! {
    #[test]
    fn compound_is_bounded_and_signed(words in prop::collection::vec(word(), 0..40)) {
        let lex = lexicon();
        let text = words.join(" ");
        let c = compound_score(&text, &lex);
        let s: f64 = words.iter().filter_map(|w| lex.valence(w)).sum();
        prop_assert!(c > -1.0 && c < 1.0);
        prop_assert_eq!(c > 0.0, s > 0.0);
        prop_assert_eq!(c < 0.0, s < 0.0);
        prop_assert!((c - s / (s * s + 15.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ewma_stays_within_prefix_range(values in prop::collection::vec(-1e3f64..1e3, 1..200), span in 1usize..50) {
        let e = ewma(&UniformSeries::dense(0, 300, values.clone()).unwrap(), span).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, v) in values.iter().enumerate() {
            lo = lo.min(*v);
            hi = hi.max(*v);
            let s = e.values[k].unwrap();
            prop_assert!(s >= lo - 1e-9 && s <= hi + 1e-9);
        }
    }

    #[test]
    fn ewma_is_causal(values in prop::collection::vec(-1e3f64..1e3, 2..100), cut in 0usize..100, noise in -1e3f64..1e3) {
        let cut = cut % (values.len() - 1);
        let mut altered = values.clone();
        for v in &mut altered[cut + 1..] {
            *v += noise;
        }
        let a = ewma(&UniformSeries::dense(0, 300, values).unwrap(), 12).unwrap();
        let b = ewma(&UniformSeries::dense(0, 300, altered).unwrap(), 12).unwrap();
        prop_assert_eq!(&a.values[..=cut], &b.values[..=cut]);
    }

    #[test]
    fn upsampling_matches_direct_evaluation(k in knots()) {
        let end = k.last().unwrap().0;
        let grid = Grid::new(0, end + HOUR, 5 * MINUTE).unwrap();
        let recs: Vec<TrendsRecord> = k.iter().map(|&(timestamp, value)| TrendsRecord { timestamp, value }).collect();
        let s = upsample_linear(&recs, &grid).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            let t = grid.instant(i);
            match (v, interpolate_at(&k, t)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "{other:?} at {t}"),
            }
        }
    }

    #[test]
    fn upsampling_reproduces_affine_trends(a in -50.0f64..50.0, b in -10.0f64..10.0, n in 2usize..20) {
        let recs: Vec<TrendsRecord> = (0..n)
            .map(|i| TrendsRecord { timestamp: i as i64 * HOUR, value: a + b * i as f64 })
            .collect();
        let grid = Grid::new(0, (n as i64 - 1) * HOUR, 5 * MINUTE).unwrap();
        let s = upsample_linear(&recs, &grid).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            let hours = grid.instant(i) as f64 / HOUR as f64;
            prop_assert!((v.unwrap() - (a + b * hours)).abs() < 1e-9);
        }
    }

    #[test]
    fn volume_sums_to_tweets_in_range(offsets in prop::collection::vec(-600i64..4000, 0..300)) {
        let grid = Grid::new(0, 3600, 5 * MINUTE).unwrap();
        let tweets: Vec<TweetRecord> = offsets
            .iter()
            .map(|&t| TweetRecord { timestamp: t, text: "good".into(), is_retweet: false, compound: None })
            .collect();
        let (vol, sent) = aggregate_tweets(&tweets, &lexicon(), &grid).unwrap();
        let inside = offsets.iter().filter(|t| (0..3600).contains(*t)).count();
        prop_assert_eq!(vol.values.iter().map(|v| v.unwrap()).sum::<f64>(), inside as f64);
        for (v, s) in vol.values.iter().zip(&sent.values) {
            prop_assert_eq!(v.unwrap() == 0.0, s.is_none());
        }
    }
}

#[test]
fn retweets_are_dropped_before_counting() {
    let tweets: Vec<TweetRecord> = (0..100)
        .map(|i| TweetRecord {
            timestamp: i * 10,
            text: if i % 10 < 3 { format!("RT @someone: bitcoin {i}") } else { format!("bitcoin {i}") },
            is_retweet: false,
            compound: None,
        })
        .collect();
    let originals = filter_retweets(tweets);
    assert_eq!(originals.len(), 70);
    let grid = Grid::new(0, 1000, 1000).unwrap();
    let (vol, _) = aggregate_tweets(&originals, &lexicon(), &grid).unwrap();
    assert_eq!(vol.values, vec![Some(70.0)]);
}
