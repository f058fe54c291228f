use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gdn_core::io::config::{apply_model, apply_train};
use gdn_core::io::{self, ConfigMap, SplitSpec};
use gdn_core::model::{DecoderVariant, GraphAutoencoder, ModelConfig};
use gdn_core::spectral::{response_table, FilterKind, FilterSpec};
use gdn_core::tasks::classify::{embed_and_classify, ClassifyOptions};
use gdn_core::tasks::recsys::noise_sweep;
use gdn_core::tasks::synthetic::{cycles_vs_stars, CommunityRatings, GraphGenerator};
use gdn_core::tasks::{reconstruct_demo, recsys_run, EvalReport, ReconstructOptions, RecsysOptions};
use gdn_core::train::{embed_graphs, train, RunLog, Task, TrainConfig};
use gdn_core::Graph;

#[derive(Parser)]
#[command(name = "gdn", version, about = "Graph autoencoders with wavelet graph deconvolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// `key = value` file of model, training and command settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Decoder ablation on a synthetic grid signal.
    ReconstructDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 20)]
        cols: usize,
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Skip the model and score the input against itself.
        #[arg(long)]
        sanity: bool,
    },
    /// Unsupervised graph embeddings scored by a linear classifier.
    EmbedClassify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: GraphData,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Social recommendation with injected rating noise.
    Recsys {
        #[command(flatten)]
        common: Common,
        /// `user,item,rating` CSV; omit for the synthetic community dataset.
        #[arg(long)]
        ratings: Option<PathBuf>,
        /// `u v` social edge list over raw user ids.
        #[arg(long)]
        social: Option<PathBuf>,
        /// Held-out ratings; otherwise --test-fraction of the rows.
        #[arg(long, conflicts_with = "test_fraction")]
        test: Option<PathBuf>,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
        /// Inclusive rating bounds, `lo,hi`.
        #[arg(long, default_value = "1,5", value_parser = parse_range)]
        range: (f64, f64),
        /// Noise levels; more than one runs a sweep.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        noise: Vec<f64>,
        /// Seeds per noise level in a sweep.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Truncated vs exact filter response on a λ grid.
    FilterResponse {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "heat")]
        kind: FilterKind,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Train the graph-level autoencoder and save its parameters.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: GraphData,
    },
}

#[derive(Args, Clone, Debug)]
struct GraphData {
    /// TU-format dataset directory; omit for synthetic cycles vs stars.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Graphs per class in the synthetic dataset.
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    /// Decoder variant: gdn, inverse_only or gcn_dec.
    #[arg(long)]
    decoder: Option<DecoderVariant>,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn load_config(common: &Common) -> Result<ConfigMap> {
    match &common.config {
        Some(p) => Ok(ConfigMap::load(p)?),
        None => Ok(ConfigMap::default()),
    }
}

/// Config file values first, then command-line overrides.
fn train_config(map: &mut ConfigMap, common: &Common, task: Task) -> Result<TrainConfig> {
    let mut tc = TrainConfig::new(task);
    apply_train(map, &mut tc)?;
    if let Some(s) = common.seed {
        tc.seed = s;
    }
    if let Some(e) = common.epochs {
        tc.epochs = e;
    }
    tc.validate()?;
    Ok(tc)
}

fn write_outputs(out: &Path, report: &EvalReport, runs: &[(String, &RunLog)]) -> Result<()> {
    io::write_report(&out.join("report.csv"), report)?;
    if !runs.is_empty() {
        io::write_runlog(&out.join("runlog.csv"), runs)?;
        io::write_timing(&out.join("timing.csv"), runs)?;
    }
    Ok(())
}

fn load_graphs(data: &GraphData, seed: u64) -> Result<(String, Vec<Graph>, Vec<i64>)> {
    match &data.dataset {
        Some(dir) => {
            let b = io::load_tu_dataset(dir).with_context(|| format!("loading {}", dir.display()))?;
            let labels = b.labels.clone().unwrap_or_else(|| vec![0; b.graphs.len()]);
            Ok((b.name, b.graphs, labels))
        }
        None => {
            let (graphs, labels) = cycles_vs_stars(data.per_class, 5..=20, seed)?;
            Ok(("cycles_vs_stars".into(), graphs, labels))
        }
    }
}

fn graph_model_config(map: &mut ConfigMap, data: &GraphData, graphs: &[Graph]) -> Result<ModelConfig> {
    let dim = graphs
        .first()
        .and_then(Graph::features)
        .map(|x| x.cols())
        .context("dataset has no graphs with features")?;
    let mut cfg = ModelConfig::embedding_defaults(dim);
    apply_model(map, &mut cfg)?;
    if let Some(v) = data.decoder {
        cfg.decoder.variant = v;
    }
    Ok(cfg)
}

fn reconstruct(common: &Common, rows: usize, cols: usize, seeds: usize, sanity: bool) -> Result<()> {
    let mut map = load_config(common)?;
    let tc = train_config(&mut map, common, Task::Reconstruct)?;
    let mut opts = ReconstructOptions {
        generator: GraphGenerator::Grid { rows, cols },
        seeds: (0..seeds as u64).map(|i| tc.seed + i).collect(),
        train: tc,
        sanity,
        ..ReconstructOptions::default()
    };
    let mut cfg = opts.model_config(DecoderVariant::Gdn);
    apply_model(&mut map, &mut cfg)?;
    map.set("signal.smooth_modes", &mut opts.signal.smooth_modes)?;
    map.set("signal.spikes", &mut opts.signal.spikes)?;
    map.set("signal.spike_amplitude", &mut opts.signal.spike_amplitude)?;
    map.finish()?;
    if cfg.pool.is_some() {
        bail!("the reconstruction demo runs without pooling");
    }
    opts.encoder_hidden = cfg.encoder.layer_dims[1..].to_vec();
    opts.decoder = cfg.decoder;

    let outcome = reconstruct_demo(&opts)?;
    let runs: Vec<(String, &RunLog)> = outcome
        .logs
        .iter()
        .map(|(v, s, log)| (format!("{}/seed{s}", v.name()), log))
        .collect();
    write_outputs(&common.out, &outcome.report, &runs)?;
    io::write_signals(&common.out.join("signals.csv"), &outcome.signals.0, &outcome.signals.1)?;
    println!("reconstruct-demo: {}", outcome.report.summary());
    Ok(())
}

fn embed_classify(common: &Common, data: &GraphData, folds: usize, repeats: usize) -> Result<()> {
    let mut map = load_config(common)?;
    let tc = train_config(&mut map, common, Task::Embed)?;
    let (name, graphs, labels) = load_graphs(data, tc.seed)?;
    let cfg = graph_model_config(&mut map, data, &graphs)?;
    map.finish()?;
    let opts = ClassifyOptions {
        folds,
        repeats,
        seed: tc.seed,
        ..ClassifyOptions::default()
    };
    let out = embed_and_classify(&graphs, &labels, cfg, &tc, &opts)?;
    write_outputs(&common.out, &out.report, &[(name.clone(), &out.log)])?;
    io::write_embeddings(&common.out.join("embeddings.csv"), &out.embeddings)?;
    println!("embed-classify {name}: {}", out.report.summary());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn recsys(
    common: &Common,
    ratings: Option<&Path>,
    social: Option<&Path>,
    test: Option<&Path>,
    test_fraction: f64,
    range: (f64, f64),
    noise: &[f64],
    seeds: usize,
) -> Result<()> {
    let mut map = load_config(common)?;
    let tc = train_config(&mut map, common, Task::Recsys)?;
    let data = match ratings {
        Some(path) => {
            let split = match test {
                Some(t) => SplitSpec::TestFile(t.to_path_buf()),
                None => SplitSpec::Fraction {
                    test_fraction,
                    seed: tc.seed,
                },
            };
            io::load_ratings(path, social, &split, range)?
        }
        None => {
            let mut gen = CommunityRatings {
                test_fraction,
                ..CommunityRatings::default()
            };
            map.set("data.users", &mut gen.users)?;
            map.set("data.items", &mut gen.items)?;
            map.set("data.density", &mut gen.density)?;
            gen.generate(tc.seed)?
        }
    };
    let mut opts = RecsysOptions {
        noise_seed: tc.seed,
        train: tc,
        ..RecsysOptions::default()
    };
    let mut cfg = opts.model_config(data.num_items);
    apply_model(&mut map, &mut cfg)?;
    map.set("recsys.top_k", &mut opts.top_k)?;
    map.finish()?;
    if cfg.pool.is_some() {
        bail!("recommendation runs without pooling");
    }
    opts.hidden = cfg.encoder.layer_dims[1..].to_vec();
    opts.decoder = cfg.decoder;

    let (train_d, test_d) = data.density();
    log::info!(
        "{} users, {} items, train density {train_d:.4}, test density {test_d:.4}",
        data.num_users,
        data.num_items
    );
    if noise.len() == 1 && seeds <= 1 {
        let out = recsys_run(&data, noise[0], &opts)?;
        write_outputs(&common.out, &out.report, &[("recsys".into(), &out.log)])?;
        println!("recsys: {}", out.report.summary());
    } else {
        let seed_list: Vec<u64> = (0..seeds.max(1) as u64).map(|i| opts.train.seed + i).collect();
        let report = noise_sweep(&data, noise, &seed_list, &opts)?;
        write_outputs(&common.out, &report, &[])?;
        println!("recsys sweep: {}", report.summary());
    }
    Ok(())
}

fn filter_response(common: &Common, kind: FilterKind, order: usize, scale: f64, points: usize) -> Result<()> {
    let spec = FilterSpec::new(kind, order, scale)?;
    let mut out = String::from("lambda,truncated,exact\n");
    for p in response_table(&spec, points) {
        let exact = p.exact.map(io::format_sig6).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{exact}\n",
            io::format_sig6(p.lambda),
            io::format_sig6(p.truncated)
        ));
    }
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let path = common.out.join("filter_response.csv");
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    let err = gdn_core::spectral::truncation_error(&spec);
    println!(
        "filter-response {kind:?} order {order} scale {scale}: max truncation error {}",
        io::format_sig6(err)
    );
    Ok(())
}

fn train_cmd(common: &Common, data: &GraphData) -> Result<()> {
    let mut map = load_config(common)?;
    let tc = train_config(&mut map, common, Task::Embed)?;
    let (name, graphs, _) = load_graphs(data, tc.seed)?;
    let cfg = graph_model_config(&mut map, data, &graphs)?;
    map.finish()?;
    let mut model = GraphAutoencoder::new(cfg, tc.seed)?;
    let inputs = graphs
        .iter()
        .map(|g| model.prepare(g))
        .collect::<gdn_core::Result<Vec<_>>>()?;
    let log = train(&mut model, &inputs, &tc)?;
    let mut report = EvalReport::default();
    report.push("final_loss", log.final_loss().unwrap_or(f64::NAN));
    report.push("graphs", graphs.len() as f64);
    report.seeds = vec![tc.seed];
    write_outputs(&common.out, &report, &[(name.clone(), &log)])?;
    model.params.save(&common.out.join("params.txt"))?;
    io::write_embeddings(&common.out.join("embeddings.csv"), &embed_graphs(&model, &inputs)?)?;
    println!("train {name}: {}", report.summary());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::ReconstructDemo {
            common,
            rows,
            cols,
            seeds,
            sanity,
        } => reconstruct(&common, rows, cols, seeds, sanity),
        Command::EmbedClassify {
            common,
            data,
            folds,
            repeats,
        } => embed_classify(&common, &data, folds, repeats),
        Command::Recsys {
            common,
            ratings,
            social,
            test,
            test_fraction,
            range,
            noise,
            seeds,
        } => recsys(
            &common,
            ratings.as_deref(),
            social.as_deref(),
            test.as_deref(),
            test_fraction,
            range,
            &noise,
            seeds,
        ),
        Command::FilterResponse {
            common,
            kind,
            order,
            scale,
            points,
        } => filter_response(&common, kind, order, scale, points),
        Command::Train { common, data } => train_cmd(&common, &data),
    }
}
