//! Linear evaluation of graph embeddings: one-vs-rest ridge classification
//! under repeated stratified k-fold cross validation.
//!
//! Features are standardized with training-fold statistics. The ridge
//! strength is chosen per outer fold by leave-one-out accuracy on the
//! training fold, which has a closed form through the eigendecomposition of
//! the training Gram matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mean_std, EvalReport};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{GraphAutoencoder, ModelConfig};
use crate::tensor::Matrix;
use crate::train::{embed_graphs, train, RunLog, TrainConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 5,
            seed: 0,
            alphas: (-3..=3).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

/// Stratified fold index for every sample: each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped.
pub fn stratified_folds(classes: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let num_classes = classes.iter().max().map_or(0, |&c| c + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &c) in classes.iter().enumerate() {
        by_class[c].push(i);
    }
    if let Some((c, members)) = by_class
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_empty() && m.len() < folds)
    {
        return Err(Error::InvalidArgument(format!(
            "class {c} has {} samples, fewer than {folds} folds",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; classes.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    Ok(fold_of)
}

struct Standardizer {
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &Matrix, rows: &[usize]) -> Self {
        let n = rows.len() as f64;
        let p = x.cols();
        let mut mean = vec![0.0; p];
        for &r in rows {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; p];
        for &r in rows {
            for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        let inv_std = var
            .iter()
            .map(|&v| if v > 1e-24 { 1.0 / v.sqrt() } else { 0.0 })
            .collect();
        Self { mean, inv_std }
    }

    fn apply(&self, x: &Matrix, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), x.cols(), |i, j| {
            (x.get(rows[i], j) - self.mean[j]) * self.inv_std[j]
        })
    }
}

fn argmax(row: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Fits one-vs-rest ridge on `train` rows and returns test predictions.
fn fit_predict(
    x: &Matrix,
    classes: &[usize],
    num_classes: usize,
    train: &[usize],
    test: &[usize],
    alphas: &[f64],
) -> Vec<usize> {
    let scaler = Standardizer::fit(x, train);
    let xt = scaler.apply(x, train);
    let xs = scaler.apply(x, test);
    let n = train.len();
    // ±1 targets, centered; the intercept is the target mean
    let y = DMatrix::from_fn(n, num_classes, |i, c| if classes[train[i]] == c { 1.0 } else { -1.0 });
    let y_mean: Vec<f64> = (0..num_classes).map(|c| y.column(c).mean()).collect();
    let yc = DMatrix::from_fn(n, num_classes, |i, c| y[(i, c)] - y_mean[c]);

    let gram = &xt * xt.transpose();
    let eig = SymmetricEigen::new(gram);
    let q = &eig.eigenvectors;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let qty = q.transpose() * &yc;

    let mut best: Option<(usize, f64, f64)> = None;
    for (ai, &alpha) in alphas.iter().enumerate() {
        // fitted = Q diag(λ/(λ+α)) Qᵀ y, hat diagonal = Σ_k q_ik² λ_k/(λ_k+α)
        let shrink: Vec<f64> = lam.iter().map(|l| l / (l + alpha)).collect();
        let scaled = DMatrix::from_fn(n, num_classes, |k, c| qty[(k, c)] * shrink[k]);
        let fitted = q * scaled;
        let mut correct = 0usize;
        let mut sq = 0.0;
        for i in 0..n {
            let h: f64 = (0..n).map(|k| q[(i, k)].powi(2) * shrink[k]).sum::<f64>() + 1.0 / n as f64;
            let denom = (1.0 - h).max(1e-12);
            let loo = (0..num_classes).map(|c| {
                let r = (yc[(i, c)] - fitted[(i, c)]) / denom;
                y[(i, c)] - r
            });
            let loo: Vec<f64> = loo.collect();
            sq += (0..num_classes).map(|c| (y[(i, c)] - loo[c]).powi(2)).sum::<f64>();
            if argmax(loo.into_iter()) == classes[train[i]] {
                correct += 1;
            }
        }
        let acc = correct as f64 / n as f64;
        if best.is_none_or(|(_, a, s)| acc > a || (acc == a && sq < s)) {
            best = Some((ai, acc, sq));
        }
    }
    let alpha = alphas[best.expect("alphas nonempty").0];
    let shrink: Vec<f64> = lam
        .iter()
        .map(|l| if l + alpha > 0.0 { 1.0 / (l + alpha) } else { 0.0 })
        .collect();
    let dual = q * DMatrix::from_fn(n, num_classes, |k, c| qty[(k, c)] * shrink[k]);
    let weights = xt.transpose() * dual;
    let scores = xs * weights;
    (0..test.len())
        .map(|i| argmax((0..num_classes).map(|c| scores[(i, c)] + y_mean[c])))
        .collect()
}

/// Repeated stratified k-fold accuracy: the mean over repeats of the mean
/// fold accuracy, with the standard deviation across repeats.
pub fn classify_eval(embeddings: &Matrix, labels: &[i64], opts: &ClassifyOptions) -> Result<EvalReport> {
    if labels.len() != embeddings.rows() {
        return Err(Error::shape(
            "classify_eval",
            format!("{} labels for {} embeddings", labels.len(), embeddings.rows()),
        ));
    }
    embeddings.ensure_finite("embeddings")?;
    if opts.folds < 2
        || opts.repeats == 0
        || opts.alphas.is_empty()
        || opts.alphas.iter().any(|&a| a.is_nan() || a <= 0.0)
    {
        return Err(Error::InvalidArgument(format!("invalid classifier options {opts:?}")));
    }
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidArgument("classification needs at least 2 classes".into()));
    }
    let classes: Vec<usize> = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("present"))
        .collect();

    let assignments = (0..opts.repeats)
        .map(|r| stratified_folds(&classes, opts.folds, opts.seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..opts.repeats)
        .flat_map(|r| (0..opts.folds).map(move |f| (r, f)))
        .collect();
    let fold_acc: Vec<f64> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let fold_of = &assignments[r];
            let (test, train): (Vec<usize>, Vec<usize>) = (0..classes.len()).partition(|&i| fold_of[i] == f);
            let pred = fit_predict(embeddings, &classes, distinct.len(), &train, &test, &opts.alphas);
            let hits = pred.iter().zip(&test).filter(|(p, &i)| **p == classes[i]).count();
            hits as f64 / test.len() as f64
        })
        .collect();
    let repeat_acc: Vec<f64> = fold_acc
        .chunks(opts.folds)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let (mean, std) = mean_std(&repeat_acc);
    let mut report = EvalReport::default();
    report.push("accuracy_mean", mean);
    report.push("accuracy_std", std);
    report.push_series("repeat_accuracy", repeat_acc);
    report.push_series("fold_accuracy", fold_acc);
    report.seeds = (0..opts.repeats).map(|r| opts.seed.wrapping_add(r as u64)).collect();
    report.ensure_finite()?;
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct EmbedClassifyOutcome {
    pub report: EvalReport,
    pub embeddings: Matrix,
    pub log: RunLog,
}

/// Trains the autoencoder on all graphs without labels, embeds every graph,
/// and evaluates the embeddings with [`classify_eval`].
pub fn embed_and_classify(
    graphs: &[Graph],
    labels: &[i64],
    config: ModelConfig,
    tc: &TrainConfig,
    opts: &ClassifyOptions,
) -> Result<EmbedClassifyOutcome> {
    let mut model = GraphAutoencoder::new(config, tc.seed)?;
    let inputs = graphs.iter().map(|g| model.prepare(g)).collect::<Result<Vec<_>>>()?;
    let log = train(&mut model, &inputs, tc)?;
    let embeddings = embed_graphs(&model, &inputs)?;
    let mut report = classify_eval(&embeddings, labels, opts)?;
    report.push("final_loss", log.final_loss().unwrap_or(f64::NAN));
    report.seeds.insert(0, tc.seed);
    report.ensure_finite()?;
    Ok(EmbedClassifyOutcome {
        report,
        embeddings,
        log,
    })
}
