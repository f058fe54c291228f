//! Seeded training loops.
//!
//! One optimizer step per batch; within a batch every graph gets its own
//! tape, gradients are computed in parallel and summed in dataset order, so
//! results do not depend on the worker count.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GraphAutoencoder, GraphInputs};
use crate::optim::AdamState;
use crate::tensor::Matrix;

/// Embedding width the graph-level pipeline is configured for.
pub const EMBEDDING_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Embed,
    Recsys,
    Reconstruct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Graphs per optimizer step. Single-graph tasks use 1 (full batch).
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub task: Task,
    /// Visit graphs in a fresh seeded order every epoch.
    pub shuffle: bool,
    /// Save parameters every this many epochs; 0 disables.
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
}

impl TrainConfig {
    pub fn new(task: Task) -> Self {
        match task {
            Task::Embed => Self {
                epochs: 20,
                batch_size: 1,
                learning_rate: 0.01,
                seed: 0,
                task,
                shuffle: true,
                checkpoint_every: 0,
                checkpoint_dir: None,
            },
            Task::Recsys => Self {
                epochs: 200,
                learning_rate: 0.005,
                shuffle: false,
                ..Self::new(Task::Embed)
            }
            .with_task(task),
            Task::Reconstruct => Self {
                epochs: 300,
                shuffle: false,
                ..Self::new(Task::Embed)
            }
            .with_task(task),
        }
    }

    fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate must be finite and nonnegative".into(),
            ));
        }
        if self.checkpoint_every > 0 && self.checkpoint_dir.is_none() {
            return Err(Error::InvalidArgument(
                "checkpoint interval set without a directory".into(),
            ));
        }
        Ok(())
    }
}

/// What a training run did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLog {
    /// Mean loss over the epoch's batches, measured before each update.
    pub epoch_losses: Vec<f64>,
    pub epoch_seconds: Vec<f64>,
    pub final_metrics: Vec<(String, f64)>,
    pub seed: u64,
    pub config_snapshot: String,
}

impl RunLog {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

/// Trains `model` in place and returns the run log.
pub fn train(model: &mut GraphAutoencoder, dataset: &[GraphInputs], tc: &TrainConfig) -> Result<RunLog> {
    tc.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot train on an empty dataset".into()));
    }
    if let Some(dir) = &tc.checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut adam = AdamState::new(&model.params, tc.learning_rate);
    let mut log = RunLog {
        seed: tc.seed,
        config_snapshot: format!("{:?}\n{:?}", model.config, tc),
        ..RunLog::default()
    };
    let mut order: Vec<usize> = (0..dataset.len()).collect();

    for epoch in 1..=tc.epochs {
        let started = Instant::now();
        if tc.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for (b, batch) in order.chunks(tc.batch_size).enumerate() {
            let diverged = |e: Error| match e {
                Error::NonFinite(_) => Error::Divergence { epoch, batch: b + 1 },
                other => other,
            };
            let results: Vec<(f64, Vec<Matrix>)> = batch
                .par_iter()
                .map(|&i| model.loss_and_grads(&dataset[i]))
                .collect::<Result<_>>()
                .map_err(diverged)?;
            let mut batch_loss = 0.0;
            let mut grads: Option<Vec<Matrix>> = None;
            for (loss, g) in results {
                batch_loss += loss;
                match &mut grads {
                    None => grads = Some(g),
                    Some(acc) => {
                        for (a, d) in acc.iter_mut().zip(&g) {
                            a.add_assign(d)?;
                        }
                    }
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: b + 1 });
            }
            let scale = 1.0 / batch.len() as f64;
            let grads: Vec<Matrix> = grads
                .expect("batch is nonempty")
                .iter()
                .map(|g| g.scale(scale))
                .collect();
            adam.step(&mut model.params, &grads)?;
            if model.params.iter().any(|(_, m)| !m.is_finite()) {
                return Err(Error::Divergence { epoch, batch: b + 1 });
            }
            total += batch_loss;
        }
        let mean = total / dataset.len() as f64;
        log.epoch_losses.push(mean);
        log.epoch_seconds.push(started.elapsed().as_secs_f64());
        log::debug!("epoch {epoch}: loss {mean:.6}");

        if tc.checkpoint_every > 0 && epoch % tc.checkpoint_every == 0 {
            let dir = tc.checkpoint_dir.as_ref().expect("validated");
            model.params.save(&dir.join(format!("checkpoint_epoch{epoch}.txt")))?;
        }
    }
    Ok(log)
}

/// One embedding row per graph, in dataset order.
pub fn embed_graphs(model: &GraphAutoencoder, dataset: &[GraphInputs]) -> Result<Matrix> {
    let dim = model.config.embedding_dim();
    if dim != EMBEDDING_DIM {
        log::warn!("embedding dimension is {dim}, expected {EMBEDDING_DIM}");
    }
    let rows: Vec<Vec<f64>> = dataset.par_iter().map(|g| model.embed(g)).collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(rows.len() * dim);
    for r in &rows {
        data.extend_from_slice(r);
    }
    Matrix::from_vec(rows.len(), dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::model::{ModelConfig, PoolConfig};

    fn tiny() -> (GraphAutoencoder, Vec<GraphInputs>) {
        let mut cfg = ModelConfig::embedding_defaults(2);
        cfg.encoder.layer_dims = vec![2, 8, 4];
        cfg.pool = Some(PoolConfig {
            clusters: 2,
            attention_hidden: 4,
        });
        cfg.decoder.hidden = 8;
        let model = GraphAutoencoder::new(cfg, 1).unwrap();
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)])
            .unwrap()
            .with_features(Matrix::from_rows(&[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
            ]))
            .unwrap();
        let inputs = vec![model.prepare(&g).unwrap()];
        (model, inputs)
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let (mut model, data) = tiny();
        let before = model.params.clone();
        let tc = TrainConfig {
            epochs: 1,
            learning_rate: 0.0,
            ..TrainConfig::new(Task::Embed)
        };
        train(&mut model, &data, &tc).unwrap();
        assert_eq!(model.params, before);
    }

    #[test]
    fn same_seed_same_log() {
        let tc = TrainConfig {
            epochs: 5,
            ..TrainConfig::new(Task::Embed)
        };
        let (mut a, data) = tiny();
        let (mut b, _) = tiny();
        let la = train(&mut a, &data, &tc).unwrap();
        let lb = train(&mut b, &data, &tc).unwrap();
        assert_eq!(la.epoch_losses, lb.epoch_losses);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn rejects_bad_configs() {
        let (mut model, data) = tiny();
        let mut tc = TrainConfig::new(Task::Embed);
        tc.epochs = 0;
        assert!(train(&mut model, &data, &tc).is_err());
        let tc = TrainConfig::new(Task::Embed);
        assert!(train(&mut model, &[], &tc).is_err());
    }

    #[test]
    fn divergence_names_epoch_and_batch() {
        let (mut model, data) = tiny();
        let tc = TrainConfig {
            epochs: 3,
            learning_rate: 1e300,
            ..TrainConfig::new(Task::Embed)
        };
        match train(&mut model, &data, &tc) {
            Err(Error::Divergence { epoch, batch }) => assert!(epoch >= 1 && batch == 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn checkpoints_written() {
        let dir = tempfile::tempdir().unwrap();
        let (mut model, data) = tiny();
        let tc = TrainConfig {
            epochs: 4,
            checkpoint_every: 2,
            checkpoint_dir: Some(dir.path().to_path_buf()),
            ..TrainConfig::new(Task::Embed)
        };
        train(&mut model, &data, &tc).unwrap();
        assert!(dir.path().join("checkpoint_epoch2.txt").exists());
        let last = crate::params::ParamStore::load(&dir.path().join("checkpoint_epoch4.txt")).unwrap();
        assert_eq!(last, model.params);
    }
}
