//! Decoder ablation: reconstruct a graph signal that mixes smooth and
//! localized components through the same encoder and each decoder variant,
//! then compare the residuals overall and per spectral band.

use rayon::prelude::*;

use super::synthetic::{smooth_plus_spikes, GraphGenerator, SignalSpec};
use super::{median, EvalReport};
use crate::error::{Error, Result};
use crate::graph::{build_sym_laplacian, Graph};
use crate::model::{DecoderVariant, EncoderConfig, GdnConfig, GraphAutoencoder, LossWeights, ModelConfig};
use crate::spectral::{SpectralBasis, DEFAULT_DENSE_LIMIT};
use crate::tensor::Matrix;
use crate::train::{train, RunLog, Task, TrainConfig};

/// Band edges on `[0, 2]`: low `[0, 2/3)`, mid `[2/3, 4/3)`, high `[4/3, 2]`.
pub const BAND_EDGES: [f64; 2] = [2.0 / 3.0, 4.0 / 3.0];
pub const BAND_NAMES: [&str; 3] = ["low", "mid", "high"];

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructOptions {
    pub generator: GraphGenerator,
    pub signal: SignalSpec,
    pub variants: Vec<DecoderVariant>,
    pub seeds: Vec<u64>,
    /// Encoder layer widths after the input; a single layer by default.
    pub encoder_hidden: Vec<usize>,
    pub decoder: GdnConfig,
    pub train: TrainConfig,
    /// Skip the model: the reconstruction is the input signal itself.
    pub sanity: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            generator: GraphGenerator::default(),
            signal: SignalSpec::default(),
            variants: vec![DecoderVariant::Gcn, DecoderVariant::InverseOnly, DecoderVariant::Gdn],
            seeds: (0..5).collect(),
            encoder_hidden: vec![16],
            decoder: GdnConfig {
                hidden: 32,
                ..GdnConfig::default()
            },
            train: TrainConfig::new(Task::Reconstruct),
            sanity: false,
        }
    }
}

impl ReconstructOptions {
    pub fn model_config(&self, variant: DecoderVariant) -> ModelConfig {
        let mut dims = vec![self.signal.channels];
        dims.extend(&self.encoder_hidden);
        ModelConfig {
            encoder: EncoderConfig::new(dims),
            pool: None,
            decoder: GdnConfig {
                variant,
                ..self.decoder
            },
            loss: LossWeights::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructOutcome {
    pub report: EvalReport,
    /// Column names and node-ordered columns for the first seed: the true
    /// signal channels followed by each variant's reconstruction.
    pub signals: (Vec<String>, Vec<Vec<f64>>),
    /// `(variant, seed, log)` for every training run.
    pub logs: Vec<(DecoderVariant, u64, RunLog)>,
}

/// Energy of `residual` in each band of the Laplacian spectrum.
pub fn band_energies(basis: &SpectralBasis, residual: &Matrix) -> Result<[f64; 3]> {
    let coeffs = basis.transform(residual)?;
    let mut bands = [0.0; 3];
    for (k, &lambda) in basis.eigenvalues.iter().enumerate() {
        let b = BAND_EDGES.iter().filter(|&&e| lambda >= e).count();
        bands[b] += coeffs.row(k).iter().map(|c| c * c).sum::<f64>();
    }
    Ok(bands)
}

struct RunResult {
    rmse: f64,
    bands: [f64; 3],
    parseval_gap: f64,
    prediction: Matrix,
    log: RunLog,
}

fn run_one(
    opts: &ReconstructOptions,
    g: &Graph,
    x: &Matrix,
    basis: &SpectralBasis,
    variant: DecoderVariant,
    seed: u64,
) -> Result<RunResult> {
    let (prediction, log) = if opts.sanity {
        (x.clone(), RunLog::default())
    } else {
        let mut model = GraphAutoencoder::new(opts.model_config(variant), seed)?;
        let inputs = model.prepare(&g.clone().with_features(x.clone())?)?;
        let mut tc = opts.train.clone();
        tc.seed = seed;
        let log = train(&mut model, std::slice::from_ref(&inputs), &tc)?;
        (model.forward(&inputs)?.x_prime, log)
    };
    let residual = x.sub(&prediction)?;
    let total = residual.frobenius_sq();
    let bands = band_energies(basis, &residual)?;
    Ok(RunResult {
        rmse: (total / residual.len() as f64).sqrt(),
        bands,
        parseval_gap: (bands.iter().sum::<f64>() - total).abs(),
        prediction,
        log,
    })
}

/// Trains every variant on every seed's graph and signal. Variants share the
/// encoder architecture and, per seed, the same initial weights.
pub fn reconstruct_demo(opts: &ReconstructOptions) -> Result<ReconstructOutcome> {
    if opts.variants.is_empty() || opts.seeds.is_empty() {
        return Err(Error::InvalidArgument("reconstruction needs variants and seeds".into()));
    }
    let instances = opts
        .seeds
        .iter()
        .map(|&seed| {
            let g = opts.generator.generate(seed)?;
            let x = smooth_plus_spikes(&g, &opts.signal, seed)?;
            let basis = SpectralBasis::of(&build_sym_laplacian(&g), DEFAULT_DENSE_LIMIT)?;
            Ok((g, x, basis))
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..opts.seeds.len())
        .flat_map(|s| (0..opts.variants.len()).map(move |v| (s, v)))
        .collect();
    let mut results: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(s, v)| {
            let (g, x, basis) = &instances[s];
            run_one(opts, g, x, basis, opts.variants[v], opts.seeds[s])
        })
        .collect::<Result<_>>()?;

    let mut report = EvalReport::default();
    let at = |s: usize, v: usize| s * opts.variants.len() + v;
    for (v, variant) in opts.variants.iter().enumerate() {
        let name = variant.name();
        let rmse: Vec<f64> = (0..opts.seeds.len()).map(|s| results[at(s, v)].rmse).collect();
        report.push(format!("{name}.rmse_median"), median(&rmse));
        for (b, band) in BAND_NAMES.iter().enumerate() {
            let e: Vec<f64> = (0..opts.seeds.len()).map(|s| results[at(s, v)].bands[b]).collect();
            report.push(format!("{name}.{band}_band_energy_median"), median(&e));
        }
    }
    let gap = results.iter().map(|r| r.parseval_gap).fold(0.0, f64::max);
    report.push("parseval_gap_max", gap);
    for (v, variant) in opts.variants.iter().enumerate() {
        let name = variant.name();
        report.push_series(
            format!("{name}.rmse"),
            (0..opts.seeds.len()).map(|s| results[at(s, v)].rmse).collect(),
        );
        for (b, band) in BAND_NAMES.iter().enumerate() {
            report.push_series(
                format!("{name}.{band}_band_energy"),
                (0..opts.seeds.len()).map(|s| results[at(s, v)].bands[b]).collect(),
            );
        }
    }
    report.seeds = opts.seeds.clone();
    report.ensure_finite()?;

    let x = &instances[0].1;
    let mut names: Vec<String> = (0..x.cols()).map(|c| format!("signal{c}")).collect();
    let mut columns: Vec<Vec<f64>> = (0..x.cols()).map(|c| x.col_values(c)).collect();
    for (v, variant) in opts.variants.iter().enumerate() {
        let p = &results[at(0, v)].prediction;
        for c in 0..p.cols() {
            names.push(format!("{}{c}", variant.name()));
            columns.push(p.col_values(c));
        }
    }
    let logs = jobs
        .iter()
        .zip(results.iter_mut())
        .map(|(&(s, v), r)| (opts.variants[v], opts.seeds[s], std::mem::take(&mut r.log)))
        .collect();
    Ok(ReconstructOutcome {
        report,
        signals: (names, columns),
        logs,
    })
}
