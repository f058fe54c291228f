//! `user,item,rating` CSV files and `u v` social edge lists.
//!
//! Raw user and item ids are arbitrary tokens; they are densified to
//! `0..n` in order of first appearance (training rows first, then test rows).
//! A header row is skipped when its rating field is not a number. Repeated
//! `(user, item)` pairs keep the last rating. Social edges that mention a
//! user without ratings are dropped, so users without friends stay isolated.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tasks::recsys::{Rating, RatingData};

#[derive(Clone, Debug, PartialEq)]
pub enum SplitSpec {
    /// Held-out ratings in a second file with the same layout.
    TestFile(PathBuf),
    /// A seeded random fraction of the rows becomes the test set.
    Fraction { test_fraction: f64, seed: u64 },
}

struct RawRow {
    line: usize,
    user: String,
    item: String,
    value: f64,
}

fn parse_rows(path: &Path, range: (f64, f64)) -> Result<Vec<RawRow>> {
    let text = super::read_text(path)?;
    let mut rows: Vec<RawRow> = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::parse(path, ln, "expected `user,item,rating`"));
        }
        let value: f64 = match fields[2].parse() {
            Ok(v) => v,
            Err(_) if rows.is_empty() && seen.is_empty() => continue,
            Err(e) => return Err(Error::parse(path, ln, format!("rating {:?}: {e}", fields[2]))),
        };
        if !value.is_finite() || value < range.0 || value > range.1 {
            return Err(Error::parse(
                path,
                ln,
                format!("rating {value} outside [{}, {}]", range.0, range.1),
            ));
        }
        let key = (fields[0].to_string(), fields[1].to_string());
        let row = RawRow {
            line: ln,
            user: key.0.clone(),
            item: key.1.clone(),
            value,
        };
        match seen.get(&key) {
            Some(&at) => {
                log::warn!(
                    "{}:{ln}: duplicate rating for user {} item {} (line {}); keeping the last",
                    path.display(),
                    key.0,
                    key.1,
                    rows[at].line
                );
                rows[at] = row;
            }
            None => {
                seen.insert(key, rows.len());
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

#[derive(Default)]
struct Densifier {
    ids: HashMap<String, usize>,
}

impl Densifier {
    fn id(&mut self, raw: &str) -> usize {
        let next = self.ids.len();
        *self.ids.entry(raw.to_string()).or_insert(next)
    }
}

/// Loads ratings, splits them, and attaches the social graph.
pub fn load_ratings(ratings: &Path, social: Option<&Path>, split: &SplitSpec, range: (f64, f64)) -> Result<RatingData> {
    if !(range.0.is_finite() && range.1.is_finite() && range.0 <= range.1) {
        return Err(Error::InvalidArgument(format!("invalid rating range {range:?}")));
    }
    let rows = parse_rows(ratings, range)?;
    let (train_rows, test_rows) = match split {
        SplitSpec::TestFile(p) => {
            let test = parse_rows(p, range)?;
            let test_keys: std::collections::HashSet<(&str, &str)> =
                test.iter().map(|r| (r.user.as_str(), r.item.as_str())).collect();
            let before = rows.len();
            let train: Vec<RawRow> = rows
                .into_iter()
                .filter(|r| !test_keys.contains(&(r.user.as_str(), r.item.as_str())))
                .collect();
            if train.len() != before {
                log::warn!(
                    "dropped {} training ratings that also appear in the test file",
                    before - train.len()
                );
            }
            (train, test)
        }
        SplitSpec::Fraction { test_fraction, seed } => {
            if !(0.0..=1.0).contains(test_fraction) {
                return Err(Error::InvalidArgument(format!(
                    "test fraction {test_fraction} outside [0, 1]"
                )));
            }
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            let n_test = (test_fraction * rows.len() as f64).round() as usize;
            let mut is_test = vec![false; rows.len()];
            for &i in &idx[..n_test] {
                is_test[i] = true;
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (row, held_out) in rows.into_iter().zip(is_test) {
                if held_out {
                    test.push(row);
                } else {
                    train.push(row);
                }
            }
            (train, test)
        }
    };

    let mut users = Densifier::default();
    let mut items = Densifier::default();
    let mut convert = |rows: Vec<RawRow>| -> Vec<Rating> {
        rows.into_iter()
            .map(|r| Rating {
                user: users.id(&r.user),
                item: items.id(&r.item),
                value: r.value,
            })
            .collect()
    };
    let train = convert(train_rows);
    let test = convert(test_rows);
    let num_users = users.ids.len();

    let mut edges = Vec::new();
    if let Some(path) = social {
        let text = super::read_text(path)?;
        let mut dropped = 0usize;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .collect();
            if toks.len() < 2 {
                return Err(Error::parse(path, i + 1, "expected `u v`"));
            }
            match (users.ids.get(toks[0]), users.ids.get(toks[1])) {
                (Some(&u), Some(&v)) => edges.push((u, v)),
                _ => dropped += 1,
            }
        }
        if dropped > 0 {
            log::info!("dropped {dropped} social edges to users without ratings");
        }
    }
    let data = RatingData {
        num_users,
        num_items: items.ids.len(),
        train,
        test,
        social: Graph::from_edges(num_users, &edges)?,
        rating_range: range,
    };
    data.validate()?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn fraction_split_is_seeded() {
        let dir = tempfile::tempdir().unwrap();
        let p = file(dir.path(), "r.csv", "user,item,rating\na,x,1\na,y,2\nb,x,3\nb,z,4\n");
        let split = SplitSpec::Fraction {
            test_fraction: 0.5,
            seed: 7,
        };
        let d = load_ratings(&p, None, &split, (1.0, 5.0)).unwrap();
        assert_eq!((d.train.len(), d.test.len()), (2, 2));
        assert_eq!(d, load_ratings(&p, None, &split, (1.0, 5.0)).unwrap());
        assert_eq!(d.num_users, 2);
        assert_eq!(d.num_items, 3);
    }

    #[test]
    fn duplicates_keep_last() {
        let dir = tempfile::tempdir().unwrap();
        let p = file(dir.path(), "r.csv", "1,10,2\n1,10,5\n2,10,1\n");
        let d = load_ratings(
            &p,
            None,
            &SplitSpec::Fraction {
                test_fraction: 0.0,
                seed: 0,
            },
            (1.0, 5.0),
        )
        .unwrap();
        assert_eq!(
            d.train,
            vec![
                Rating {
                    user: 0,
                    item: 0,
                    value: 5.0
                },
                Rating {
                    user: 1,
                    item: 0,
                    value: 1.0
                }
            ]
        );
    }

    #[test]
    fn malformed_and_out_of_range_rows_report_lines() {
        let dir = tempfile::tempdir().unwrap();
        let split = SplitSpec::Fraction {
            test_fraction: 0.0,
            seed: 0,
        };
        let p = file(dir.path(), "a.csv", "1,2,3\n1,2\n");
        let err = load_ratings(&p, None, &split, (1.0, 5.0)).unwrap_err();
        assert!(err.to_string().contains("a.csv:2"), "{err}");
        let p = file(dir.path(), "b.csv", "1,2,3\n1,3,x\n");
        assert!(load_ratings(&p, None, &split, (1.0, 5.0))
            .unwrap_err()
            .to_string()
            .contains("b.csv:2"));
        let p = file(dir.path(), "c.csv", "1,2,3\n\n1,3,9\n");
        let err = load_ratings(&p, None, &split, (1.0, 5.0)).unwrap_err();
        assert!(
            err.to_string().contains("c.csv:3") && err.to_string().contains("outside"),
            "{err}"
        );
    }

    #[test]
    fn test_file_split_and_social_graph() {
        let dir = tempfile::tempdir().unwrap();
        let train = file(dir.path(), "train.csv", "u1,i1,4\nu2,i1,3\nu3,i2,5\n");
        let test = file(dir.path(), "test.csv", "u1,i2,2\nu4,i1,1\n");
        let social = file(dir.path(), "s.txt", "u1 u2\nu2 u9\nu3,u4\n");
        let d = load_ratings(&train, Some(&social), &SplitSpec::TestFile(test), (1.0, 5.0)).unwrap();
        assert_eq!(d.num_users, 4);
        assert_eq!(d.num_items, 2);
        assert_eq!(
            d.test,
            vec![
                Rating {
                    user: 0,
                    item: 1,
                    value: 2.0
                },
                Rating {
                    user: 3,
                    item: 0,
                    value: 1.0
                }
            ]
        );
        assert_eq!(d.social.edges(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn test_file_overrides_train_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let train = file(dir.path(), "train.csv", "u1,i1,4\nu2,i1,3\n");
        let test = file(dir.path(), "test.csv", "u1,i1,2\n");
        let d = load_ratings(&train, None, &SplitSpec::TestFile(test), (1.0, 5.0)).unwrap();
        assert_eq!(d.train.len(), 1);
        assert_eq!(d.test.len(), 1);
    }
}
