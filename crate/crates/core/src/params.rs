//! Named parameter collections and their checkpoint file format.
//!
//! A checkpoint is UTF-8 text:
//!
//! ```text
//! gdn-checkpoint 1
//! <name> <rows> <cols>
//! <row 0 values, space separated>
//! ...
//! ```
//!
//! repeated per matrix in insertion order. Values are written in Rust's
//! shortest round-trip exponent form, so loading restores every bit.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAGIC: &str = "gdn-checkpoint 1";

/// Ordered collection of named matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    entries: Vec<(String, Matrix)>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces `name`.
    pub fn insert(&mut self, name: impl Into<String>, value: Matrix) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some((_, slot)) => *slot = value,
            None => self.entries.push((name, value)),
        }
    }

    /// Inserts a Glorot-uniform `rows × cols` matrix.
    pub fn insert_glorot<R: Rng + ?Sized>(&mut self, name: &str, rows: usize, cols: usize, rng: &mut R) {
        self.insert(name, Matrix::glorot(rows, cols, rng));
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn require(&self, name: &str) -> Result<&Matrix> {
        self.get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("missing parameter {name}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.entries.iter_mut().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn value(&self, i: usize) -> &Matrix {
        &self.entries[i].1
    }

    pub fn value_mut(&mut self, i: usize) -> &mut Matrix {
        &mut self.entries[i].1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.entries.iter().map(|(n, m)| (n.as_str(), m))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (name, m) in &self.entries {
            let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::parse(origin, 1, format!("expected header `{MAGIC}`"))),
        }
        let mut store = ParamStore::new();
        while let Some((lineno, header)) = lines.next() {
            if header.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = header.split_whitespace().collect();
            let [name, rows, cols] = fields[..] else {
                return Err(Error::parse(origin, lineno + 1, "expected `<name> <rows> <cols>`"));
            };
            let dim = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::parse(origin, lineno + 1, e.to_string()))
            };
            let (rows, cols) = (dim(rows)?, dim(cols)?);
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (rl, line) = lines
                    .next()
                    .ok_or_else(|| Error::parse(origin, lineno + 1, format!("truncated matrix {name}")))?;
                let before = data.len();
                for tok in line.split_whitespace() {
                    data.push(
                        tok.parse::<f64>()
                            .map_err(|e| Error::parse(origin, rl + 1, e.to_string()))?,
                    );
                }
                if data.len() - before != cols {
                    return Err(Error::parse(origin, rl + 1, format!("expected {cols} values")));
                }
            }
            let m = Matrix::from_vec(rows, cols, data)?;
            m.ensure_finite("checkpoint")?;
            store.insert(name, m);
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_round_trip_is_bitwise(values in proptest::collection::vec(-1e6f64..1e6, 6)) {
            let mut s = ParamStore::new();
            s.insert("a.w", Matrix::from_vec(2, 3, values.clone()).unwrap());
            s.insert("b", Matrix::column(&[values[0] * 1e-300, -0.0]));
            let back = ParamStore::from_text(&s.to_text(), Path::new("mem")).unwrap();
            for ((n1, m1), (n2, m2)) in s.iter().zip(back.iter()) {
                prop_assert_eq!(n1, n2);
                let bits1: Vec<u64> = m1.data().iter().map(|v| v.to_bits()).collect();
                let bits2: Vec<u64> = m2.data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(bits1, bits2);
            }
        }
    }

    #[test]
    fn rejects_bad_files() {
        let p = Path::new("mem");
        assert!(ParamStore::from_text("nope\n", p).is_err());
        assert!(ParamStore::from_text("gdn-checkpoint 1\nw 1 2\n1.0\n", p).is_err());
        assert!(ParamStore::from_text("gdn-checkpoint 1\nw 2 1\n1.0\n", p).is_err());
        assert!(ParamStore::from_text("gdn-checkpoint 1\nw 1 1\nNaN\n", p).is_err());
    }

    #[test]
    fn insert_replaces() {
        let mut s = ParamStore::new();
        s.insert("w", Matrix::zeros(1, 1));
        s.insert("w", Matrix::filled(1, 1, 2.0));
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("w").unwrap().get(0, 0), 2.0);
    }
}
