//! Graph classification benchmarks in the TU Dortmund layout.
//!
//! A dataset `DS` is a directory holding:
//!
//! - `DS_A.txt`: one `i, j` line per directed edge, global 1-based node ids
//! - `DS_graph_indicator.txt`: line `i` is the graph id of node `i`
//! - `DS_graph_labels.txt`: line `g` is the label of graph `g`
//! - `DS_node_labels.txt` (optional): line `i` is the label of node `i`
//! - `DS_node_attributes.txt` (optional): comma-separated floats per node
//!
//! Node labels are one-hot encoded over their sorted distinct values. Without
//! node labels, nodes get a one-hot degree feature; degrees at or above the
//! cap share one overflow bucket. Node attributes are appended after either.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tasks::synthetic::degree_one_hot;
use crate::tensor::Matrix;

pub const DEFAULT_DEGREE_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub labels: Option<Vec<i64>>,
}

impl DatasetBundle {
    /// Labels mapped to `0..num_classes` in sorted order of the raw values.
    pub fn class_indices(&self) -> Option<Vec<usize>> {
        let labels = self.labels.as_ref()?;
        let mut distinct: Vec<i64> = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Some(
            labels
                .iter()
                .map(|l| distinct.binary_search(l).expect("present"))
                .collect(),
        )
    }

    pub fn feature_dim(&self) -> usize {
        self.graphs.first().and_then(Graph::features).map_or(0, Matrix::cols)
    }
}

fn dataset_prefix(dir: &Path) -> Result<String> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|n| n.strip_suffix("_A.txt").map(str::to_string))
        .collect();
    names.sort();
    match names.len() {
        1 => Ok(names.remove(0)),
        0 => Err(Error::Data(format!("no *_A.txt file in {}", dir.display()))),
        _ => Err(Error::Data(format!("several datasets in {}: {names:?}", dir.display()))),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_ints(path: &Path) -> Result<Vec<(usize, i64)>> {
    let text = super::read_text(path)?;
    data_lines(&text)
        .map(|(ln, l)| {
            l.parse::<i64>()
                .map(|v| (ln, v))
                .map_err(|e| Error::parse(path, ln, e.to_string()))
        })
        .collect()
}

pub fn load_tu_dataset(dir: &Path) -> Result<DatasetBundle> {
    load_tu_dataset_with_cap(dir, DEFAULT_DEGREE_CAP)
}

pub fn load_tu_dataset_with_cap(dir: &Path, degree_cap: usize) -> Result<DatasetBundle> {
    let name = dataset_prefix(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}.txt")) };

    let indicator_path = file("graph_indicator");
    let indicator = parse_ints(&indicator_path)?;
    let gmin = indicator.iter().map(|&(_, g)| g).min().unwrap_or(1);
    let gbase = if gmin == 0 { 0 } else { 1 };
    let mut graph_of = Vec::with_capacity(indicator.len());
    for &(ln, g) in &indicator {
        if g < gbase {
            return Err(Error::parse(&indicator_path, ln, format!("invalid graph id {g}")));
        }
        graph_of.push((g - gbase) as usize);
    }
    let num_graphs = graph_of.iter().max().map_or(0, |&g| g + 1);
    let mut local = vec![0usize; graph_of.len()];
    let mut sizes = vec![0usize; num_graphs];
    for (node, &g) in graph_of.iter().enumerate() {
        local[node] = sizes[g];
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Data(format!(
            "graph {} has no nodes in {}",
            g + gbase as usize,
            indicator_path.display()
        )));
    }

    let a_path = file("A");
    let a_text = super::read_text(&a_path)?;
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (ln, line) in data_lines(&a_text) {
        let mut parts = line.split(',').map(str::trim);
        let mut id = || -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| Error::parse(&a_path, ln, "expected `i, j`"))?;
            let v: usize = tok
                .parse()
                .map_err(|e: std::num::ParseIntError| Error::parse(&a_path, ln, e.to_string()))?;
            if v == 0 || v > graph_of.len() {
                return Err(Error::parse(
                    &a_path,
                    ln,
                    format!("node id {v} outside 1..={}", graph_of.len()),
                ));
            }
            Ok(v - 1)
        };
        let (u, v) = (id()?, id()?);
        if graph_of[u] != graph_of[v] {
            return Err(Error::parse(
                &a_path,
                ln,
                format!("edge joins graphs {} and {}", graph_of[u] + 1, graph_of[v] + 1),
            ));
        }
        edges[graph_of[u]].push((local[u], local[v]));
    }

    let labels_path = file("graph_labels");
    let labels = if labels_path.exists() {
        let raw = parse_ints(&labels_path)?;
        if raw.len() != num_graphs {
            return Err(Error::Data(format!(
                "{} has {} labels for {num_graphs} graphs",
                labels_path.display(),
                raw.len()
            )));
        }
        Some(raw.into_iter().map(|(_, v)| v).collect())
    } else {
        None
    };

    let mut graphs = edges
        .iter()
        .zip(&sizes)
        .map(|(e, &n)| Graph::from_edges(n, e))
        .collect::<Result<Vec<_>>>()?;

    let node_labels_path = file("node_labels");
    let node_labels = if node_labels_path.exists() {
        let raw = parse_ints(&node_labels_path)?;
        if raw.is_empty() {
            log::warn!("{} is empty; using degree features", node_labels_path.display());
            None
        } else if raw.len() != graph_of.len() {
            return Err(Error::Data(format!(
                "{} has {} labels for {} nodes",
                node_labels_path.display(),
                raw.len(),
                graph_of.len()
            )));
        } else {
            Some(raw.into_iter().map(|(_, v)| v).collect::<Vec<_>>())
        }
    } else {
        None
    };

    let attr_path = file("node_attributes");
    let attributes = if attr_path.exists() {
        let text = super::read_text(&attr_path)?;
        let rows = data_lines(&text)
            .map(|(ln, l)| {
                l.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::parse(&attr_path, ln, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != graph_of.len() || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(Error::Data(format!(
                "{} must have one equal-width row per node",
                attr_path.display()
            )));
        }
        Some(rows)
    } else {
        None
    };

    let mut features: Vec<Matrix> = match &node_labels {
        Some(nl) => {
            let mut distinct = nl.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let mut x: Vec<Matrix> = sizes.iter().map(|&n| Matrix::zeros(n, distinct.len())).collect();
            for (node, label) in nl.iter().enumerate() {
                let col = distinct.binary_search(label).expect("present");
                x[graph_of[node]].set(local[node], col, 1.0);
            }
            x
        }
        None => degree_one_hot(&graphs, degree_cap),
    };
    if let Some(a) = &attributes {
        let mut per_graph: Vec<Vec<Vec<f64>>> = sizes.iter().map(|&n| vec![Vec::new(); n]).collect();
        for (node, row) in a.iter().enumerate() {
            per_graph[graph_of[node]][local[node]] = row.clone();
        }
        features = features
            .iter()
            .zip(per_graph)
            .map(|(x, rows)| Matrix::hconcat(&[x, &Matrix::from_rows(&rows)]))
            .collect::<Result<_>>()?;
    }
    graphs = graphs
        .into_iter()
        .zip(features)
        .map(|(g, x)| g.with_features(x))
        .collect::<Result<_>>()?;

    Ok(DatasetBundle { name, graphs, labels })
}

/// Writes graphs in the TU layout (both edge directions, 1-based ids).
pub fn write_tu_dataset(
    dir: &Path,
    name: &str,
    graphs: &[Graph],
    labels: &[i64],
    node_labels: Option<&[Vec<i64>]>,
) -> Result<()> {
    if labels.len() != graphs.len() {
        return Err(Error::InvalidArgument("one label per graph".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mut a, mut ind, mut gl, mut nl) = (String::new(), String::new(), String::new(), String::new());
    let mut offset = 0;
    for (gi, g) in graphs.iter().enumerate() {
        for u in 0..g.num_nodes() {
            let _ = writeln!(ind, "{}", gi + 1);
            for &v in g.neighbors(u) {
                let _ = writeln!(a, "{}, {}", offset + u + 1, offset + v + 1);
            }
        }
        if let Some(node_labels) = node_labels {
            for l in &node_labels[gi] {
                let _ = writeln!(nl, "{l}");
            }
        }
        let _ = writeln!(gl, "{}", labels[gi]);
        offset += g.num_nodes();
    }
    let mut files: BTreeMap<&str, String> = BTreeMap::from([("A", a), ("graph_indicator", ind), ("graph_labels", gl)]);
    if node_labels.is_some() {
        files.insert("node_labels", nl);
    }
    for (suffix, body) in files {
        let p = dir.join(format!("{name}_{suffix}.txt"));
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        std::fs::write(dir.join(name), body).unwrap();
    }

    /// triangle (nodes 1-3) + 2-node path (nodes 4-5)
    fn fixture(dir: &Path) {
        write(dir, "FX_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
        write(dir, "FX_graph_indicator.txt", "1\n1\n1\n2\n2\n");
        write(dir, "FX_graph_labels.txt", "1\n-1\n");
    }

    #[test]
    fn loads_fixture_with_degree_features() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let b = load_tu_dataset(dir.path()).unwrap();
        assert_eq!(b.name, "FX");
        let sizes: Vec<usize> = b.graphs.iter().map(Graph::num_nodes).collect();
        assert_eq!(sizes, vec![3, 2]);
        assert_eq!(b.graphs[0].num_edges(), 3);
        assert_eq!(b.graphs[1].num_edges(), 1);
        assert_eq!(b.labels, Some(vec![1, -1]));
        assert_eq!(b.class_indices(), Some(vec![1, 0]));
        // degrees 0..=2 → 3 columns; triangle nodes have degree 2
        let x = b.graphs[0].features().unwrap();
        assert_eq!(x.shape(), (3, 3));
        assert_eq!(x.row(0), &[0.0, 0.0, 1.0]);
        assert_eq!(b.graphs[1].features().unwrap().row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn node_labels_one_hot_and_attributes() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "FX_node_labels.txt", "5\n7\n5\n9\n7\n");
        write(dir.path(), "FX_node_attributes.txt", "0.5\n1\n1.5\n2\n2.5\n");
        let b = load_tu_dataset(dir.path()).unwrap();
        let x = b.graphs[1].features().unwrap();
        assert_eq!(x.row(0), &[0.0, 0.0, 1.0, 2.0]);
        assert_eq!(x.row(1), &[0.0, 1.0, 0.0, 2.5]);
    }

    #[test]
    fn empty_node_labels_fall_back_to_degree() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "FX_node_labels.txt", "");
        let b = load_tu_dataset(dir.path()).unwrap();
        assert_eq!(b.feature_dim(), 3);
    }

    #[test]
    fn degree_cap_buckets_overflow() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let b = load_tu_dataset_with_cap(dir.path(), 1).unwrap();
        assert_eq!(b.feature_dim(), 2);
        assert_eq!(b.graphs[0].features().unwrap().row(0), &[0.0, 1.0]);
    }

    #[test]
    fn cross_graph_edge_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "FX_A.txt", "1, 2\n3, 4\n");
        let err = load_tu_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("FX_A.txt:2"), "{err}");
        write(dir.path(), "FX_A.txt", "1, 9\n");
        let err = load_tu_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("FX_A.txt:1"), "{err}");
    }

    #[test]
    fn write_then_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let graphs = vec![
            Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(),
            Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap(),
        ];
        write_tu_dataset(
            dir.path(),
            "RT",
            &graphs,
            &[0, 1],
            Some(&[vec![1, 1, 2, 2], vec![3, 1, 1]]),
        )
        .unwrap();
        let b = load_tu_dataset(dir.path()).unwrap();
        for (g, h) in graphs.iter().zip(&b.graphs) {
            assert_eq!(g.edges(), h.edges());
        }
        assert_eq!(b.feature_dim(), 3);
        assert_eq!(b.labels, Some(vec![0, 1]));
    }

    #[test]
    fn loading_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        assert_eq!(
            load_tu_dataset(dir.path()).unwrap(),
            load_tu_dataset(dir.path()).unwrap()
        );
    }
}
