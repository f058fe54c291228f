//! Social recommendation as feature recovery: users are nodes of the social
//! graph, their rating rows are node features, and the model is trained to
//! reproduce the observed training ratings.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{median, EvalReport};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{EncoderConfig, FeatureLoss, GdnConfig, GraphAutoencoder, LossWeights, ModelConfig, Propagation};
use crate::tensor::Matrix;
use crate::train::{train, RunLog, Task, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatingData {
    pub num_users: usize,
    pub num_items: usize,
    pub train: Vec<Rating>,
    pub test: Vec<Rating>,
    pub social: Graph,
    /// Inclusive bounds of valid ratings.
    pub rating_range: (f64, f64),
}

impl RatingData {
    pub fn validate(&self) -> Result<()> {
        if self.social.num_nodes() != self.num_users {
            return Err(Error::Data(format!(
                "social graph has {} nodes for {} users",
                self.social.num_nodes(),
                self.num_users
            )));
        }
        let (lo, hi) = self.rating_range;
        let mut train_keys = HashSet::new();
        for r in &self.train {
            self.check(r, lo, hi)?;
            if !train_keys.insert((r.user, r.item)) {
                return Err(Error::Data(format!(
                    "duplicate training rating ({}, {})",
                    r.user, r.item
                )));
            }
        }
        for r in &self.test {
            self.check(r, lo, hi)?;
            if train_keys.contains(&(r.user, r.item)) {
                return Err(Error::Data(format!(
                    "({}, {}) is in both train and test",
                    r.user, r.item
                )));
            }
        }
        Ok(())
    }

    fn check(&self, r: &Rating, lo: f64, hi: f64) -> Result<()> {
        if r.user >= self.num_users || r.item >= self.num_items {
            return Err(Error::Data(format!("rating ({}, {}) out of bounds", r.user, r.item)));
        }
        if !(lo..=hi).contains(&r.value) {
            return Err(Error::Data(format!("rating {} outside [{lo}, {hi}]", r.value)));
        }
        Ok(())
    }

    /// Users × items matrix of training ratings and the matching 0/1 mask.
    pub fn train_matrix(&self) -> (Matrix, Matrix) {
        let mut values = Matrix::zeros(self.num_users, self.num_items);
        let mut mask = Matrix::zeros(self.num_users, self.num_items);
        for r in &self.train {
            values.set(r.user, r.item, r.value);
            mask.set(r.user, r.item, 1.0);
        }
        (values, mask)
    }

    pub fn density(&self) -> (f64, f64) {
        let cells = (self.num_users * self.num_items).max(1) as f64;
        (self.train.len() as f64 / cells, self.test.len() as f64 / cells)
    }
}

fn draw_rating<R: Rng>(range: (f64, f64), rng: &mut R) -> f64 {
    let (lo, hi) = range;
    if lo.fract() == 0.0 && hi.fract() == 0.0 {
        rng.gen_range(lo as i64..=hi as i64) as f64
    } else if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Adds `⌊p · |train|⌋` random ratings to the training set: a uniform user
/// with at least one unrated item, a uniform unrated item of that user, and a
/// uniform rating (integer-valued when both range bounds are integers).
/// Existing train and test cells are never touched.
pub fn inject_noise(data: &RatingData, p: f64, seed: u64) -> Result<RatingData> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("noise level {p} outside [0, 1]")));
    }
    let count = (p * data.train.len() as f64).floor() as usize;
    let mut taken: Vec<HashSet<usize>> = vec![HashSet::new(); data.num_users];
    for r in data.train.iter().chain(&data.test) {
        taken[r.user].insert(r.item);
    }
    let free: usize = taken.iter().map(|t| data.num_items - t.len()).sum();
    if count > free {
        return Err(Error::InvalidArgument(format!(
            "cannot add {count} noisy ratings: only {free} cells are unrated"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut open: Vec<usize> = (0..data.num_users)
        .filter(|&u| taken[u].len() < data.num_items)
        .collect();
    let mut out = data.clone();
    for _ in 0..count {
        let slot = rng.gen_range(0..open.len());
        let user = open[slot];
        let available: Vec<usize> = (0..data.num_items).filter(|i| !taken[user].contains(i)).collect();
        let item = available[rng.gen_range(0..available.len())];
        taken[user].insert(item);
        if taken[user].len() == data.num_items {
            open.remove(slot);
        }
        out.train.push(Rating {
            user,
            item,
            value: draw_rating(data.rating_range, &mut rng),
        });
    }
    Ok(out)
}

/// Indices of the `k` largest entries of `row`; ties go to the lower index.
fn top_k(row: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn top_lists(predictions: &Matrix, k: usize) -> Vec<Vec<usize>> {
    (0..predictions.rows()).map(|u| top_k(predictions.row(u), k)).collect()
}

/// Mean over users of `ILS_u = ½ Σ_m Σ_n cos(i_m, i_n)` over the user's
/// top-`k` predicted items, where item vectors are the columns of `items`
/// and the double sum includes self-pairs. Zero columns have cosine 0.
///
/// Computed as `½ ‖Σ_m c_m‖²` with `c_m` the unit item columns.
pub fn ils(predictions: &Matrix, items: &Matrix, k: usize) -> Result<f64> {
    check_ils_shapes(predictions, items)?;
    let t = items.transpose();
    let mut unit = t.clone();
    for i in 0..unit.rows() {
        let norm = crate::tensor::dot(t.row(i), t.row(i)).sqrt();
        let row = unit.row_mut(i);
        for v in row.iter_mut() {
            *v = if norm > 0.0 { *v / norm } else { 0.0 };
        }
    }
    let lists = top_lists(predictions, k);
    let per_user: Vec<f64> = lists
        .par_iter()
        .map(|list| {
            let mut s = vec![0.0; unit.cols()];
            for &i in list {
                for (acc, v) in s.iter_mut().zip(unit.row(i)) {
                    *acc += v;
                }
            }
            0.5 * crate::tensor::dot(&s, &s)
        })
        .collect();
    Ok(per_user.iter().sum::<f64>() / per_user.len().max(1) as f64)
}

/// Direct double loop over item pairs; the reference for [`ils`].
pub fn ils_naive(predictions: &Matrix, items: &Matrix, k: usize) -> Result<f64> {
    check_ils_shapes(predictions, items)?;
    let cos = |a: usize, b: usize| {
        let (ca, cb) = (items.col_values(a), items.col_values(b));
        let (na, nb) = (crate::tensor::dot(&ca, &ca).sqrt(), crate::tensor::dot(&cb, &cb).sqrt());
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            crate::tensor::dot(&ca, &cb) / (na * nb)
        }
    };
    let mut total = 0.0;
    for list in top_lists(predictions, k) {
        let mut u = 0.0;
        for &m in &list {
            for &n in &list {
                u += cos(m, n);
            }
        }
        total += 0.5 * u;
    }
    Ok(total / predictions.rows().max(1) as f64)
}

fn check_ils_shapes(predictions: &Matrix, items: &Matrix) -> Result<()> {
    if predictions.cols() != items.cols() {
        return Err(Error::shape(
            "ils",
            format!(
                "{} predicted items vs {} item columns",
                predictions.cols(),
                items.cols()
            ),
        ));
    }
    Ok(())
}

/// Root mean squared error of `predictions` at the given ratings.
pub fn rmse(predictions: &Matrix, ratings: &[Rating]) -> f64 {
    if ratings.is_empty() {
        return 0.0;
    }
    let sq: f64 = ratings
        .iter()
        .map(|r| (predictions.get(r.user, r.item) - r.value).powi(2))
        .sum();
    (sq / ratings.len() as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecsysOptions {
    /// Encoder layer widths after the input.
    pub hidden: Vec<usize>,
    pub decoder: GdnConfig,
    pub train: TrainConfig,
    pub top_k: usize,
    /// Seed of the noise injection; the model uses `train.seed`.
    pub noise_seed: u64,
}

impl Default for RecsysOptions {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128],
            decoder: GdnConfig::default(),
            train: TrainConfig::new(Task::Recsys),
            top_k: 10,
            noise_seed: 0,
        }
    }
}

impl RecsysOptions {
    /// Pooling-free model: left-normalized social propagation, stacked
    /// encoder layers, masked MSE on the observed ratings.
    pub fn model_config(&self, num_items: usize) -> ModelConfig {
        let mut dims = vec![num_items];
        dims.extend(&self.hidden);
        ModelConfig {
            encoder: EncoderConfig {
                layer_dims: dims,
                propagation: Propagation::LeftNormAdj,
                stack_layer_outputs: true,
            },
            pool: None,
            decoder: self.decoder,
            loss: LossWeights {
                structure: 0.0,
                feature: 1.0,
                feature_loss: FeatureLoss::Mse,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecsysOutcome {
    pub report: EvalReport,
    /// Users × items predicted ratings.
    pub predictions: Matrix,
    pub log: RunLog,
}

/// Injects noise at level `p`, trains, and scores the held-out ratings.
pub fn recsys_run(data: &RatingData, p: f64, opts: &RecsysOptions) -> Result<RecsysOutcome> {
    data.validate()?;
    if data.train.is_empty() {
        return Err(Error::InvalidArgument("no training ratings".into()));
    }
    let noisy = inject_noise(data, p, opts.noise_seed)?;
    let (values, mask) = noisy.train_matrix();
    let config = opts.model_config(data.num_items);
    let mut model = GraphAutoencoder::new(config, opts.train.seed)?;
    let social = noisy.social.clone().with_features(values.clone())?;
    let inputs = model.prepare(&social)?.with_masked_target(values.clone(), mask)?;
    let log = train(&mut model, std::slice::from_ref(&inputs), &opts.train)?;
    let predictions = model.forward(&inputs)?.x_prime;

    let mut report = EvalReport::default();
    report.push("noise_level", p);
    report.push("noise_ratings", (noisy.train.len() - data.train.len()) as f64);
    report.push("train_rmse", rmse(&predictions, &noisy.train));
    report.push("test_rmse", rmse(&predictions, &data.test));
    report.push("ils", ils(&predictions, &values, opts.top_k.min(data.num_items))?);
    report.push("final_loss", log.final_loss().unwrap_or(f64::NAN));
    report.seeds = vec![opts.train.seed, opts.noise_seed];
    report.ensure_finite()?;
    Ok(RecsysOutcome {
        report,
        predictions,
        log,
    })
}

/// Median test RMSE per noise level over `seeds`, plus the least-squares
/// slope of that median against the noise level.
pub fn noise_sweep(data: &RatingData, levels: &[f64], seeds: &[u64], opts: &RecsysOptions) -> Result<EvalReport> {
    if levels.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument("noise sweep needs levels and seeds".into()));
    }
    let jobs: Vec<(f64, u64)> = levels
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let mut o = opts.clone();
            o.train.seed = s;
            o.noise_seed = s;
            let r = recsys_run(data, p, &o)?.report;
            Ok((
                r.metric("test_rmse").expect("reported"),
                r.metric("ils").expect("reported"),
            ))
        })
        .collect::<Result<_>>()?;
    let mut report = EvalReport::default();
    let mut medians = Vec::with_capacity(levels.len());
    for (li, &p) in levels.iter().enumerate() {
        let chunk = &results[li * seeds.len()..(li + 1) * seeds.len()];
        let rmses: Vec<f64> = chunk.iter().map(|r| r.0).collect();
        let ilss: Vec<f64> = chunk.iter().map(|r| r.1).collect();
        let m = median(&rmses);
        medians.push(m);
        report.push(format!("test_rmse_median@p={p}"), m);
        report.push(format!("ils_median@p={p}"), median(&ilss));
        report.push_series(format!("test_rmse@p={p}"), rmses);
    }
    report.push("rmse_noise_slope", slope(levels, &medians));
    report.seeds = seeds.to_vec();
    report.ensure_finite()?;
    Ok(report)
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RatingData {
        RatingData {
            num_users: 3,
            num_items: 4,
            train: vec![
                Rating {
                    user: 0,
                    item: 0,
                    value: 4.0,
                },
                Rating {
                    user: 1,
                    item: 1,
                    value: 2.0,
                },
                Rating {
                    user: 2,
                    item: 2,
                    value: 5.0,
                },
                Rating {
                    user: 2,
                    item: 3,
                    value: 1.0,
                },
            ],
            test: vec![Rating {
                user: 0,
                item: 1,
                value: 3.0,
            }],
            social: Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
            rating_range: (1.0, 5.0),
        }
    }

    #[test]
    fn identical_columns_give_half_k_squared() {
        let items = Matrix::from_rows(&[vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]]);
        let preds = Matrix::from_rows(&[vec![0.3, 0.1, 0.2], vec![1.0, 2.0, 3.0]]);
        assert!((ils(&preds, &items, 3).unwrap() - 4.5).abs() < 1e-12);
        assert!((ils_naive(&preds, &items, 3).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn ils_zero_columns_and_orthogonal_items() {
        let items = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let preds = Matrix::from_rows(&[vec![3.0, 2.0, 1.0]]);
        // two orthogonal unit items: the double sum is just the two self-pairs
        assert!((ils(&preds, &items, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((ils(&preds, &items, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_never_overwrites() {
        let d = tiny();
        let noisy = inject_noise(&d, 1.0, 3).unwrap();
        assert_eq!(noisy.train.len(), 8);
        assert_eq!(&noisy.train[..4], &d.train[..]);
        noisy.validate().unwrap();
        for r in &noisy.train[4..] {
            assert_eq!(r.value.fract(), 0.0);
            assert!(!d.test.iter().any(|t| (t.user, t.item) == (r.user, r.item)));
        }
        assert_eq!(noisy, inject_noise(&d, 1.0, 3).unwrap());
        assert_eq!(inject_noise(&d, 0.0, 3).unwrap(), d);
    }

    #[test]
    fn saturated_matrix_is_an_error() {
        let mut d = tiny();
        d.num_items = 2;
        d.train = vec![
            Rating {
                user: 0,
                item: 0,
                value: 1.0,
            },
            Rating {
                user: 1,
                item: 0,
                value: 1.0,
            },
            Rating {
                user: 1,
                item: 1,
                value: 1.0,
            },
            Rating {
                user: 2,
                item: 0,
                value: 1.0,
            },
            Rating {
                user: 2,
                item: 1,
                value: 1.0,
            },
        ];
        d.test = vec![Rating {
            user: 0,
            item: 1,
            value: 1.0,
        }];
        assert!(inject_noise(&d, 0.2, 0).is_err());
        assert!(inject_noise(&d, 0.1, 0).is_ok());
        assert!(inject_noise(&d, 1.5, 0).is_err());
    }

    #[test]
    fn rmse_of_exact_predictions_is_zero() {
        let d = tiny();
        let mut p = d.train_matrix().0;
        p.set(0, 1, 3.0);
        assert_eq!(rmse(&p, &d.test), 0.0);
        assert_eq!(rmse(&p, &d.train), 0.0);
    }

    #[test]
    fn run_is_deterministic_and_finite() {
        let d = tiny();
        let mut opts = RecsysOptions {
            hidden: vec![8, 4],
            ..RecsysOptions::default()
        };
        opts.decoder.hidden = 8;
        opts.train.epochs = 5;
        let a = recsys_run(&d, 0.5, &opts).unwrap();
        let b = recsys_run(&d, 0.5, &opts).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.report.metric("noise_ratings"), Some(2.0));
        assert_eq!(a.predictions.shape(), (3, 4));
    }

    #[test]
    fn slope_of_a_line() {
        assert!((slope(&[0.0, 0.5, 1.0], &[1.0, 2.0, 3.0]) - 2.0).abs() < 1e-12);
    }
}
