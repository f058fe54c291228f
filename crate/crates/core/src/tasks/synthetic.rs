//! Seeded synthetic data: graph signals with smooth and spiky parts,
//! cycles-vs-stars graph classification, and community-structured ratings.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::recsys::{Rating, RatingData};
use crate::error::{Error, Result};
use crate::graph::{build_sym_laplacian, Graph};
use crate::spectral::{SpectralBasis, DEFAULT_DENSE_LIMIT};
use crate::tensor::Matrix;

/// Attempts before a generator that keeps producing disconnected graphs gives up.
pub const MAX_GENERATOR_ATTEMPTS: usize = 10;

pub fn grid_graph(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::from_edges(rows * cols, &edges).expect("grid indices are in range")
}

pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("indices are in range")
}

pub fn cycle_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).expect("indices are in range")
}

pub fn star_graph(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Graph::from_edges(n, &edges).expect("indices are in range")
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphGenerator {
    Grid { rows: usize, cols: usize },
    ErdosRenyi { nodes: usize, edge_prob: f64 },
}

impl Default for GraphGenerator {
    fn default() -> Self {
        Self::Grid { rows: 20, cols: 20 }
    }
}

impl GraphGenerator {
    /// A connected graph; disconnected draws are retried with the next seed.
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        for attempt in 0..MAX_GENERATOR_ATTEMPTS as u64 {
            let g = match *self {
                Self::Grid { rows, cols } => grid_graph(rows, cols),
                Self::ErdosRenyi { nodes, edge_prob } => {
                    if !(0.0..=1.0).contains(&edge_prob) {
                        return Err(Error::InvalidArgument(format!("edge probability {edge_prob}")));
                    }
                    erdos_renyi(
                        nodes,
                        edge_prob,
                        &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt)),
                    )
                }
            };
            if g.num_nodes() > 0 && g.is_connected() {
                return Ok(g);
            }
            log::debug!("generator attempt {} produced a disconnected graph", attempt + 1);
        }
        Err(Error::Data(format!(
            "no connected graph after {MAX_GENERATOR_ATTEMPTS} attempts from {self:?}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalSpec {
    /// Number of lowest non-constant Laplacian eigenvectors mixed in.
    pub smooth_modes: usize,
    pub spikes: usize,
    pub spike_amplitude: f64,
    pub channels: usize,
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self {
            smooth_modes: 6,
            spikes: 12,
            spike_amplitude: 1.0,
            channels: 1,
        }
    }
}

/// `channels` columns, each a random mixture of low-frequency eigenvectors
/// scaled to unit peak plus `spikes` single-node impulses of random sign.
pub fn smooth_plus_spikes(g: &Graph, spec: &SignalSpec, seed: u64) -> Result<Matrix> {
    let n = g.num_nodes();
    let basis = SpectralBasis::of(&build_sym_laplacian(g), DEFAULT_DENSE_LIMIT)?;
    let modes = spec.smooth_modes.min(n.saturating_sub(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::zeros(n, spec.channels);
    for c in 0..spec.channels {
        let mut col = vec![0.0; n];
        for k in 1..=modes {
            let w: f64 = rng.gen_range(-1.0..1.0);
            for (i, v) in col.iter_mut().enumerate() {
                *v += w * basis.eigenvectors.get(i, k);
            }
        }
        let peak = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            col.iter_mut().for_each(|v| *v /= peak);
        }
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(&mut rng);
        for &i in nodes.iter().take(spec.spikes) {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            col[i] += sign * spec.spike_amplitude;
        }
        for (i, v) in col.into_iter().enumerate() {
            x.set(i, c, v);
        }
    }
    Ok(x)
}

/// One-hot degree features; degrees at or above `cap` share the last column.
/// The width is fixed by the largest degree over all graphs.
pub fn degree_one_hot(graphs: &[Graph], cap: usize) -> Vec<Matrix> {
    let max_degree = graphs
        .iter()
        .flat_map(|g| (0..g.num_nodes()).map(|i| g.degree(i)))
        .max()
        .unwrap_or(0);
    let width = max_degree.min(cap) + 1;
    graphs
        .iter()
        .map(|g| {
            let mut x = Matrix::zeros(g.num_nodes(), width);
            for i in 0..g.num_nodes() {
                x.set(i, g.degree(i).min(cap), 1.0);
            }
            x
        })
        .collect()
}

/// `per_class` cycles (label 0) and `per_class` stars (label 1) with node
/// counts uniform in `sizes`, interleaved, with degree features attached.
pub fn cycles_vs_stars(
    per_class: usize,
    sizes: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<(Vec<Graph>, Vec<i64>)> {
    if *sizes.start() < 3 {
        return Err(Error::InvalidArgument("cycles need at least 3 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        graphs.push(cycle_graph(rng.gen_range(sizes.clone())));
        labels.push(0);
        graphs.push(star_graph(rng.gen_range(sizes.clone())));
        labels.push(1);
    }
    let features = degree_one_hot(&graphs, crate::io::tu::DEFAULT_DEGREE_CAP);
    let graphs = graphs
        .into_iter()
        .zip(features)
        .map(|(g, x)| g.with_features(x))
        .collect::<Result<_>>()?;
    Ok((graphs, labels))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommunityRatings {
    pub users: usize,
    pub items: usize,
    pub communities: usize,
    /// Fraction of user-item cells that carry a rating.
    pub density: f64,
    pub test_fraction: f64,
    pub p_in: f64,
    pub p_out: f64,
}

impl Default for CommunityRatings {
    fn default() -> Self {
        Self {
            users: 120,
            items: 60,
            communities: 4,
            density: 0.2,
            test_fraction: 0.2,
            p_in: 0.15,
            p_out: 0.005,
        }
    }
}

impl CommunityRatings {
    /// Ratings `clamp(3 + 2 u·v, 1, 5)` from 2-d user and item factors.
    /// Users of a community share a factor up to small jitter and are more
    /// likely to be friends with each other.
    pub fn generate(&self, seed: u64) -> Result<RatingData> {
        if self.communities == 0 || self.users == 0 || self.items == 0 {
            return Err(Error::InvalidArgument("empty rating generator".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let community: Vec<usize> = (0..self.users).map(|u| u % self.communities).collect();
        let centers: Vec<[f64; 2]> = (0..self.communities)
            .map(|c| {
                let t = std::f64::consts::TAU * c as f64 / self.communities as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let user_f: Vec<[f64; 2]> = community
            .iter()
            .map(|&c| {
                [
                    centers[c][0] + rng.gen_range(-0.1..0.1),
                    centers[c][1] + rng.gen_range(-0.1..0.1),
                ]
            })
            .collect();
        let item_f: Vec<[f64; 2]> = (0..self.items)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();

        let mut edges = Vec::new();
        for u in 0..self.users {
            for v in u + 1..self.users {
                let p = if community[u] == community[v] {
                    self.p_in
                } else {
                    self.p_out
                };
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }

        let mut cells: Vec<(usize, usize)> = (0..self.users)
            .flat_map(|u| (0..self.items).map(move |i| (u, i)))
            .collect();
        cells.shuffle(&mut rng);
        let observed = ((self.density * cells.len() as f64).round() as usize).min(cells.len());
        let n_test = (self.test_fraction * observed as f64).round() as usize;
        let rating = |(u, i): (usize, usize)| Rating {
            user: u,
            item: i,
            value: (3.0 + 2.0 * (user_f[u][0] * item_f[i][0] + user_f[u][1] * item_f[i][1])).clamp(1.0, 5.0),
        };
        let mut test: Vec<Rating> = cells[..n_test].iter().copied().map(rating).collect();
        let mut train: Vec<Rating> = cells[n_test..observed].iter().copied().map(rating).collect();
        train.sort_by_key(|r| (r.user, r.item));
        test.sort_by_key(|r| (r.user, r.item));
        debug_assert!({
            let t: HashSet<_> = train.iter().map(|r| (r.user, r.item)).collect();
            test.iter().all(|r| !t.contains(&(r.user, r.item)))
        });
        let data = RatingData {
            num_users: self.users,
            num_items: self.items,
            train,
            test,
            social: Graph::from_edges(self.users, &edges)?,
            rating_range: (1.0, 5.0),
        };
        data.validate()?;
        Ok(data)
    }
}
