mod common;

use common::{connected_graph, permutation, rng, small_config, with_random_features};
use gdn_core::model::{DecoderVariant, EncoderConfig, GraphAutoencoder, ModelConfig};
use gdn_core::tasks::synthetic::degree_one_hot;
use gdn_core::train::{embed_graphs, train, Task, TrainConfig, EMBEDDING_DIM};
use gdn_core::Graph;

fn tiny_config() -> TrainConfig {
    let mut tc = TrainConfig::new(Task::Reconstruct);
    tc.epochs = 200;
    tc.learning_rate = 0.01;
    tc
}

#[test]
fn feature_loss_halves_on_a_tiny_graph() {
    for variant in [DecoderVariant::Gdn, DecoderVariant::InverseOnly] {
        let g = with_random_features(connected_graph(8, 0.3, &mut rng(3)), 3, &mut rng(4));
        let mut config = small_config(3, variant);
        config.encoder = EncoderConfig::new(vec![3, 16, 16]);
        config.decoder.hidden = 16;
        config.loss.structure = 0.0;
        let mut model = GraphAutoencoder::new(config, 1).unwrap();
        let inputs = vec![model.prepare(&g).unwrap()];
        let log = train(&mut model, &inputs, &tiny_config()).unwrap();
        let first = log.epoch_losses[0];
        let last = log.final_loss().unwrap();
        assert!(log.epoch_losses.iter().all(|l| l.is_finite()));
        assert!(last <= 0.5 * first, "{variant:?}: {first} -> {last}");
    }
}

#[test]
fn training_is_reproducible() {
    let g = with_random_features(connected_graph(8, 0.3, &mut rng(3)), 3, &mut rng(4));
    let run = || {
        let mut model = GraphAutoencoder::new(small_config(3, DecoderVariant::Gdn), 7).unwrap();
        let inputs = vec![model.prepare(&g).unwrap()];
        let mut tc = tiny_config();
        tc.epochs = 20;
        let log = train(&mut model, &inputs, &tc).unwrap();
        (log.epoch_losses, model.params.to_text())
    };
    assert_eq!(run(), run());
}

fn featured(graphs: &[Graph]) -> Vec<Graph> {
    let feats = degree_one_hot(graphs, 8);
    graphs
        .iter()
        .cloned()
        .zip(feats)
        .map(|(g, x)| g.with_features(x).unwrap())
        .collect()
}

#[test]
fn embeddings_are_a_graph_invariant() {
    let base = connected_graph(12, 0.2, &mut rng(11));
    let perm = permutation(12, &mut rng(12));
    let other = connected_graph(9, 0.3, &mut rng(13));
    let graphs = featured(&[base.clone(), base.clone(), base.permute(&perm).unwrap(), other]);
    let d = graphs[0].features().unwrap().cols();

    let config = ModelConfig::embedding_defaults(d);
    assert_eq!(config.embedding_dim(), EMBEDDING_DIM);
    let mut model = GraphAutoencoder::new(config, 0).unwrap();
    let inputs: Vec<_> = graphs.iter().map(|g| model.prepare(g).unwrap()).collect();
    let mut tc = TrainConfig::new(Task::Embed);
    tc.epochs = 3;
    train(&mut model, &inputs, &tc).unwrap();

    let emb = embed_graphs(&model, &inputs).unwrap();
    assert_eq!((emb.rows(), emb.cols()), (4, 512));
    assert_eq!(emb.row(0), emb.row(1));
    let drift = emb
        .row(0)
        .iter()
        .zip(emb.row(2))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "permuted copy drifted by {drift}");
    assert_ne!(emb.row(0), emb.row(3));
}
