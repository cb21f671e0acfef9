use std::fs;
use std::path::{Path, PathBuf};

use fearlab::pipeline::{Pipeline, Stage, StageManifest, MANIFEST};
use fearlab::{FearlabError, Overrides, RunConfig};

/// A two-day run small enough for debug builds.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        r#"
seed = 11
out_dir = "out"
[inputs]
quotes = "in/quotes.csv"
tweets = "in/tweets.jsonl"
trends = "in/trends.csv"
index_prices = "in/prices.csv"
lexicon = "in/lexicon.tsv"
[grid]
start = "2019-05-01T00:00:00Z"
end = "2019-05-03T00:00:00Z"
[dataset]
window = 6
[model]
mode = "fixed"
cv_folds = 3
[model.params]
n_stages = 10
max_depth = 2
max_bins = 16
[importance]
repeats = 2
[sweep]
windows = [1, 3, 6]
[synth]
strikes_per_expiry = 9
tweets_per_interval = 2.0
{extra}
"#
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn cli(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fearlab").chain(args.iter().copied());
    let code = fearlab::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn full_run_writes_every_stage_with_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "");
    let cfg = cfg_path.to_str().unwrap();
    assert_eq!(cli(&["synth", "--config", cfg]).0, 0);
    let (code, out, err) = cli(&["all", "--config", cfg]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("index price from feed"), "{out}");

    let root = dir.path().join("out");
    for stage in Stage::ALL {
        let m: StageManifest =
            serde_json::from_str(&fs::read_to_string(root.join(stage.name()).join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m.stage, stage.name());
        assert_eq!(m.seed, 11);
        assert!(!m.artifacts.is_empty());
    }
    for file in ["index/vxbt.csv", "dataset/features.csv", "train/model.json", "importance/metrics.json", "sweep/sweep.csv"] {
        assert!(root.join(file).is_file(), "{file}");
    }
    let sweep = fs::read_to_string(root.join("sweep/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
}

#[test]
fn stage_reruns_are_idempotent_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "");
    let cfg = cfg_path.to_str().unwrap();
    assert_eq!(cli(&["synth", "--config", cfg]).0, 0);
    assert_eq!(cli(&["all", "--config", cfg]).0, 0);
    let first = tree_bytes(&dir.path().join("out"));
    assert_eq!(cli(&["train", "--config", cfg]).0, 0);
    assert_eq!(tree_bytes(&dir.path().join("out")), first);

    let other = dir.path().join("other");
    let (code, _, err) = cli(&["all", "--config", cfg, "--seed", "12", "--out", other.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let model = |root: &Path| fs::read(root.join("train/manifest.json")).unwrap();
    assert_ne!(model(&other), model(&dir.path().join("out")));
}

#[test]
fn train_without_dataset_names_the_missing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "");
    let (code, _, err) = cli(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("fearlab dataset"), "{err}");

    let cfg = RunConfig::load(&cfg_path, &Overrides::default()).unwrap();
    match Pipeline::new(cfg).run(Stage::Train) {
        Err(FearlabError::MissingArtifact { stage, .. }) => assert_eq!(stage, "dataset"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn config_errors_exit_one_and_list_everything() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path(), "");
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("seed = 11", "")
        .replace("window = 6", "window = 0\ntrain_fraction = 2.0");
    fs::write(&path, text).unwrap();
    let (code, _, err) = cli(&["index", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    for needle in ["seed", "dataset.window", "dataset.train_fraction"] {
        assert!(err.contains(needle), "{needle} missing from {err}");
    }
    // With the seed supplied on the command line only the two remain.
    let (code, _, err) = cli(&["index", "--config", path.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code, 1);
    assert!(!err.contains("seed is required"), "{err}");
}

#[test]
fn argument_errors_and_help() {
    assert_eq!(cli(&["bogus", "--config", "x.toml"]).0, 1);
    assert_eq!(cli(&["all"]).0, 1);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("--paper-eq2-minus"));
}

#[test]
fn compat_flags_change_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path(), "");
    let base = RunConfig::load(&path, &Overrides::default()).unwrap();
    let compat = RunConfig::load(
        &path,
        &Overrides {
            paper_compat: true,
            paper_eq2_minus: true,
            ..Overrides::default()
        },
    )
    .unwrap();
    assert!(compat.index.eq2_minus);
    assert_ne!(base.hash(), compat.hash());
}
