#![allow(dead_code)]

use gdn_core::model::{
    DecoderVariant, EncoderConfig, FeatureLoss, GdnConfig, GraphAutoencoder, GraphInputs, LossWeights, ModelConfig,
    PoolConfig,
};
use gdn_core::{Graph, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus extra edges, so the graph is always connected.
pub fn connected_graph<R: Rng>(n: usize, extra_prob: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(extra_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn with_random_features<R: Rng>(g: Graph, d: usize, rng: &mut R) -> Graph {
    let x = random_matrix(g.num_nodes(), d, rng);
    g.with_features(x).unwrap()
}

/// Small model with every component switched on.
pub fn small_config(d: usize, variant: DecoderVariant) -> ModelConfig {
    ModelConfig {
        encoder: EncoderConfig::new(vec![d, 5, 4]),
        pool: Some(PoolConfig {
            clusters: 3,
            attention_hidden: 4,
        }),
        decoder: GdnConfig {
            variant,
            hidden: 5,
            ..GdnConfig::default()
        },
        loss: LossWeights {
            structure: 0.5,
            feature: 1.0,
            feature_loss: FeatureLoss::Mse,
        },
    }
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or the absolute difference norm when both are tiny.
pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    let diff = a.sub(b).unwrap().frobenius_sq().sqrt();
    let scale = a.frobenius_sq().sqrt().max(b.frobenius_sq().sqrt());
    if scale < 1e-8 {
        diff
    } else {
        diff / scale
    }
}

/// Central differences of the model loss with respect to every parameter.
pub fn numeric_grads(model: &GraphAutoencoder, inputs: &GraphInputs, h: f64) -> Vec<Matrix> {
    let mut m = model.clone();
    let mut out = Vec::new();
    for p in 0..m.params.len() {
        let (rows, cols) = m.params.value(p).shape();
        let mut g = Matrix::zeros(rows, cols);
        for k in 0..rows * cols {
            let orig = m.params.value(p).data()[k];
            m.params.value_mut(p).data_mut()[k] = orig + h;
            let up = m.forward(inputs).unwrap().loss;
            m.params.value_mut(p).data_mut()[k] = orig - h;
            let down = m.forward(inputs).unwrap().loss;
            m.params.value_mut(p).data_mut()[k] = orig;
            g.data_mut()[k] = (up - down) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// Worst relative error between analytic and numeric gradients over all parameters.
pub fn worst_gradient_error(model: &GraphAutoencoder, inputs: &GraphInputs) -> f64 {
    let (_, analytic) = model.loss_and_grads(inputs).unwrap();
    let numeric = numeric_grads(model, inputs, 1e-6);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| rel_err(a, n))
        .fold(0.0, f64::max)
}

/// `Σ_k c_k L^k x` with explicit dense powers of `L`.
pub fn dense_poly(coeffs: &[f64], l: &Matrix, x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    let mut power = x.clone();
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = l.matmul(&power).unwrap();
        }
        out.axpy(c, &power).unwrap();
    }
    out
}

pub fn all_filters() -> Vec<gdn_core::spectral::FilterSpec> {
    use gdn_core::spectral::FilterSpec;
    vec![
        FilterSpec::low_pass(),
        FilterSpec::inverse_gcn(1),
        FilterSpec::inverse_gcn(3),
        FilterSpec::heat(3, 1.0).unwrap(),
        FilterSpec::inverse_heat(3, 1.0).unwrap(),
        FilterSpec::heat(6, 0.5).unwrap(),
        FilterSpec::inverse_heat(10, 1.0).unwrap(),
    ]
}

/// A uniformly random permutation of `0..n`.
pub fn permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
