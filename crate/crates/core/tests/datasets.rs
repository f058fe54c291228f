//! Checks against public benchmark files. Each test is a no-op unless its
//! environment variable points at a local copy:
//!
//! - `GDN_PROTEINS_DIR`: TU-format PROTEINS directory.
//! - `GDN_CIAO_RATINGS`, `GDN_CIAO_TEST`, `GDN_CIAO_SOCIAL`: Ciao train and
//!   test rating CSVs and the social edge list.

use std::path::PathBuf;

use gdn_core::io::{load_ratings, load_tu_dataset, SplitSpec};

fn env_path(key: &str) -> Option<PathBuf> {
    let path = std::env::var_os(key).map(PathBuf::from);
    if path.is_none() {
        eprintln!("{key} not set; skipping");
    }
    path
}

#[test]
fn proteins_statistics() {
    let Some(dir) = env_path("GDN_PROTEINS_DIR") else {
        return;
    };
    let bundle = load_tu_dataset(&dir).unwrap();
    assert_eq!(bundle.graphs.len(), 1113);
    let labels = bundle.labels.as_ref().unwrap();
    assert_eq!(labels.len(), 1113);
    let mut classes = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    assert_eq!(classes.len(), 2);
    let avg_nodes = bundle.graphs.iter().map(|g| g.num_nodes()).sum::<usize>() as f64 / 1113.0;
    let avg_edges = bundle.graphs.iter().map(|g| g.num_edges()).sum::<usize>() as f64 / 1113.0;
    assert!((avg_nodes - 39.1).abs() < 0.05, "average node count {avg_nodes}");
    assert!((avg_edges - 72.8).abs() < 0.05, "average edge count {avg_edges}");
}

#[test]
fn ciao_statistics() {
    let (Some(ratings), Some(test), Some(social)) = (
        env_path("GDN_CIAO_RATINGS"),
        env_path("GDN_CIAO_TEST"),
        env_path("GDN_CIAO_SOCIAL"),
    ) else {
        return;
    };
    let data = load_ratings(&ratings, Some(&social), &SplitSpec::TestFile(test), (1.0, 5.0)).unwrap();
    assert_eq!((data.num_users, data.num_items), (7317, 1000));
    assert_eq!((data.train.len(), data.test.len()), (39_279, 16_892));
    let (train_d, test_d) = data.density();
    assert!(
        ((train_d + test_d) * 100.0 - 0.77).abs() < 0.005,
        "rating density {}",
        train_d + test_d
    );
    let social_d = data.social.num_edges() as f64 / (data.num_users * data.num_users) as f64;
    assert!((social_d * 100.0 - 0.21).abs() < 0.005, "social density {social_d}");
}
