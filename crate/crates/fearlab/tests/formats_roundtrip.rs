use fearlab::formats::{read_dataset, read_labels, read_series, write_dataset, write_labels, write_series};
use fearlab::FearlabError;
use fearlab_core::dataset::windowize;
use fearlab_core::{Direction, DirectionSeries, UniformSeries};
use proptest::prelude::*;

const T0: i64 = 1_556_668_800;

fn labels(n: usize, shift: usize) -> DirectionSeries {
    DirectionSeries {
        start: T0,
        interval: 300,
        labels: (0..n).map(|k| Direction::from_index((k * 7 + shift) % 3)).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_with_gaps_round_trip(values in prop::collection::vec(prop::option::of(-1e6f64..1e6), 1..200)) {
        let dir = tempfile::tempdir().unwrap();
        let s = UniformSeries::new(T0, 300, values).unwrap();
        let path = dir.path().join("s.csv");
        write_series(&path, "value", &s).unwrap();
        prop_assert_eq!(read_series(&path, 300).unwrap(), s);
    }
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let l = labels(500, 1);
    let path = dir.path().join("l.csv");
    write_labels(&path, &l).unwrap();
    assert_eq!(read_labels(&path, 300).unwrap(), l);
}

#[test]
fn dataset_round_trip_keeps_names_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let dirs: Vec<(String, DirectionSeries)> = ["vxbt", "index", "trends"]
        .iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), labels(120, i)))
        .collect();
    let ds = windowize(&dirs, "vxbt", 4, 1).unwrap();
    let (f, t) = (dir.path().join("f.csv"), dir.path().join("t.csv"));
    write_dataset(&f, &t, &ds).unwrap();
    assert_eq!(read_dataset(&f, &t).unwrap(), ds);
}

#[test]
fn irregular_series_file_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(
        &path,
        "timestamp,value\n2019-05-01T00:00:00Z,1\n2019-05-01T00:05:00Z,2\n2019-05-01T00:15:00Z,3\n",
    )
    .unwrap();
    assert!(matches!(read_series(&path, 300), Err(FearlabError::Artifact { .. })));
}
