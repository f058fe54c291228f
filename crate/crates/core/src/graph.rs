//! Undirected unweighted graphs and the normalized operators derived from them.
//!
//! The raw adjacency never stores self-loops; normalizations that need them
//! add them on construction. Isolated nodes get a zero `D^{-1/2}` entry, so
//! their row in the symmetric Laplacian is the identity row and the spectrum
//! stays inside `[0, 2]`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::tensor::Matrix;

/// Immutable undirected graph with CSR adjacency and optional node features.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    indptr: Vec<usize>,
    neighbors: Vec<usize>,
    features: Option<Matrix>,
}

impl Graph {
    /// Builds a graph on `n` nodes. Edge direction, duplicates and self-loops
    /// are discarded.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        indptr.push(0);
        for mut list in adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend(list);
            indptr.push(neighbors.len());
        }
        Ok(Self {
            n,
            indptr,
            neighbors,
            features: None,
        })
    }

    pub fn with_features(mut self, features: Matrix) -> Result<Self> {
        if features.rows() != self.n {
            return Err(Error::shape(
                "Graph::with_features",
                format!("{} feature rows for {} nodes", features.rows(), self.n),
            ));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn features(&self) -> Option<&Matrix> {
        self.features.as_ref()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn adjacency(&self) -> CsrMatrix {
        let triplets = (0..self.n)
            .flat_map(|u| self.neighbors(u).iter().map(move |&v| (u, v, 1.0)))
            .collect();
        CsrMatrix::from_triplets(self.n, self.n, triplets).expect("neighbors are in range")
    }

    pub fn dense_adjacency(&self) -> Matrix {
        self.adjacency().to_dense()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Relabels nodes: node `perm[i]` of `self` becomes node `i` of the result.
    /// Features are permuted along.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidArgument(
                "permutation length differs from node count".into(),
            ));
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= self.n || inverse[p] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            inverse[p] = i;
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(u, v)| (inverse[u], inverse[v]))
            .collect();
        let g = Graph::from_edges(self.n, &edges)?;
        match &self.features {
            Some(x) => g.with_features(x.select_rows(perm)),
            None => Ok(g),
        }
    }

    /// `D^{-1/2}` diagonal with zero for isolated nodes.
    fn inv_sqrt_degrees(&self, self_loops: bool) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let d = self.degree(i) + usize::from(self_loops);
                if d == 0 {
                    0.0
                } else {
                    1.0 / (d as f64).sqrt()
                }
            })
            .collect()
    }
}

/// Which normalization an operator holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `I − D^{-1/2} A D^{-1/2}`
    SymLaplacian,
    /// `D^{-1/2} A D^{-1/2}`
    SymAdj,
    /// `D̃^{-1/2} (A + I) D̃^{-1/2}`
    RenormAdj,
    /// `D^{-1} A`
    LeftNormAdj,
}

/// A sparse `n × n` operator built from a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedOperator {
    kind: OperatorKind,
    matrix: CsrMatrix,
}

impl NormalizedOperator {
    pub fn build(kind: OperatorKind, g: &Graph) -> Self {
        match kind {
            OperatorKind::SymLaplacian => build_sym_laplacian(g),
            OperatorKind::SymAdj => build_sym_adj(g),
            OperatorKind::RenormAdj => build_renorm_adj(g),
            OperatorKind::LeftNormAdj => build_left_norm_adj(g),
        }
    }

    /// Wraps an arbitrary square matrix, e.g. the identity in tests.
    pub fn from_matrix(kind: OperatorKind, matrix: CsrMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::shape("NormalizedOperator", "operator must be square"));
        }
        Ok(Self { kind, matrix })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn to_dense(&self) -> Matrix {
        self.matrix.to_dense()
    }
}

pub fn build_sym_laplacian(g: &Graph) -> NormalizedOperator {
    let inv = g.inv_sqrt_degrees(false);
    let mut triplets = Vec::with_capacity(g.n + g.neighbors.len());
    for u in 0..g.n {
        triplets.push((u, u, 1.0));
        for &v in g.neighbors(u) {
            triplets.push((u, v, -inv[u] * inv[v]));
        }
    }
    NormalizedOperator {
        kind: OperatorKind::SymLaplacian,
        matrix: CsrMatrix::from_triplets(g.n, g.n, triplets).expect("indices in range"),
    }
}

pub fn build_sym_adj(g: &Graph) -> NormalizedOperator {
    let inv = g.inv_sqrt_degrees(false);
    let triplets = (0..g.n)
        .flat_map(|u| {
            let inv = &inv;
            g.neighbors(u).iter().map(move |&v| (u, v, inv[u] * inv[v]))
        })
        .collect();
    NormalizedOperator {
        kind: OperatorKind::SymAdj,
        matrix: CsrMatrix::from_triplets(g.n, g.n, triplets).expect("indices in range"),
    }
}

pub fn build_renorm_adj(g: &Graph) -> NormalizedOperator {
    let inv = g.inv_sqrt_degrees(true);
    let mut triplets = Vec::with_capacity(g.n + g.neighbors.len());
    for u in 0..g.n {
        triplets.push((u, u, inv[u] * inv[u]));
        for &v in g.neighbors(u) {
            triplets.push((u, v, inv[u] * inv[v]));
        }
    }
    NormalizedOperator {
        kind: OperatorKind::RenormAdj,
        matrix: CsrMatrix::from_triplets(g.n, g.n, triplets).expect("indices in range"),
    }
}

pub fn build_left_norm_adj(g: &Graph) -> NormalizedOperator {
    let triplets = (0..g.n)
        .flat_map(|u| {
            let w = 1.0 / g.degree(u) as f64;
            g.neighbors(u).iter().map(move |&v| (u, v, w))
        })
        .collect();
    NormalizedOperator {
        kind: OperatorKind::LeftNormAdj,
        matrix: CsrMatrix::from_triplets(g.n, g.n, triplets).expect("indices in range"),
    }
}

/// Sparse operator times dense matrix.
pub fn spmm(op: &NormalizedOperator, x: &Matrix) -> Result<Matrix> {
    op.matrix.spmm(x)
}

/// Parses a `u v` edge list. Blank lines and `#` comments are skipped;
/// whitespace, commas or tabs separate the two indices. If the smallest index
/// is 0 the list is 0-based, otherwise 1-based. Returns the node count
/// (largest index + 1 after rebasing) and the rebased edges.
pub fn parse_edge_list(text: &str, origin: &std::path::Path) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty());
        let mut next = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected two node indices"))?
                .parse::<usize>()
                .map_err(|e| Error::parse(origin, lineno + 1, e.to_string()))
        };
        let u = next()?;
        let v = next()?;
        raw.push((u, v));
    }
    let min = raw.iter().map(|&(u, v)| u.min(v)).min().unwrap_or(0);
    let base = usize::from(min > 0);
    let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u - base, v - base)).collect();
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    Ok((n, edges))
}
