//! The graph autoencoder.
//!
//! ```text
//! H  = GCN layers over X                       (relu between layers, last linear)
//! S  = row_softmax(tanh(H W1) W2)              n × K soft assignment
//! Z  = Sᵀ H,   A_pool = Sᵀ A S                 coarse graph
//! H' = S Z,    A'     = S A_pool Sᵀ            unpooled graph
//! M  = g⁻¹(L) H' W3                            truncated inverse filter
//! X' = Ψ relu(Ψ⁻¹ M W4) W5                     wavelet-domain thresholding
//! loss = λ_A · MSE(A, A') + λ_X · f(X, X')
//! ```
//!
//! Without pooling the encoder output feeds the decoder directly. No layer
//! has a bias term.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{build_left_norm_adj, build_renorm_adj, build_sym_laplacian, Graph};
use crate::params::ParamStore;
use crate::sparse::CsrMatrix;
use crate::spectral::{FilterSpec, DEFAULT_ORDER, DEFAULT_SCALE};
use crate::tensor::Matrix;

/// Threshold applied to the dense `A'` when the decoder runs on the unpooled graph.
pub const UNPOOLED_EDGE_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// `D̃^{-1/2}(A + I)D̃^{-1/2}`
    RenormAdj,
    /// `D^{-1}A`
    LeftNormAdj,
}

impl Propagation {
    pub fn build(self, g: &Graph) -> CsrMatrix {
        match self {
            Propagation::RenormAdj => build_renorm_adj(g).into_matrix(),
            Propagation::LeftNormAdj => build_left_norm_adj(g).into_matrix(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderConfig {
    /// Input dimension followed by each layer's output dimension.
    pub layer_dims: Vec<usize>,
    pub propagation: Propagation,
    /// Concatenate every layer's output instead of returning the last one.
    pub stack_layer_outputs: bool,
}

impl EncoderConfig {
    pub fn new(layer_dims: Vec<usize>) -> Self {
        Self {
            layer_dims,
            propagation: Propagation::RenormAdj,
            stack_layer_outputs: false,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        if self.stack_layer_outputs {
            self.layer_dims[1..].iter().sum()
        } else {
            *self.layer_dims.last().expect("validated")
        }
    }

    fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 || self.layer_dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "encoder needs an input dimension and at least one positive layer dimension".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoolConfig {
    pub clusters: usize,
    pub attention_hidden: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            clusters: 32,
            attention_hidden: 128,
        }
    }
}

/// Decoder family. All three share parameter shapes and differ only in which
/// graph filters surround the two linear layers:
///
/// - `Gdn`:         `M = g⁻¹(L) H' W3`, `X' = Ψ relu(Ψ⁻¹ M W4) W5`
/// - `InverseOnly`: `M = g⁻¹(L) H' W3`, `X' = g⁻¹(L) relu(M W4) W5`
/// - `Gcn`:         `M = P H' W3`,      `X' = P relu(M W4) W5`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoderVariant {
    Gdn,
    InverseOnly,
    Gcn,
}

impl DecoderVariant {
    pub fn name(self) -> &'static str {
        match self {
            DecoderVariant::Gdn => "gdn",
            DecoderVariant::InverseOnly => "inverse_only",
            DecoderVariant::Gcn => "gcn_dec",
        }
    }
}

impl std::str::FromStr for DecoderVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gdn" => Ok(Self::Gdn),
            "inverse" | "inverse_only" | "inverse_gcn" => Ok(Self::InverseOnly),
            "gcn" | "gcn_dec" => Ok(Self::Gcn),
            other => Err(Error::InvalidArgument(format!("unknown decoder `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderGraph {
    /// The input graph's Laplacian.
    Original,
    /// The Laplacian of `A'` thresholded at [`UNPOOLED_EDGE_THRESHOLD`].
    Unpooled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdnConfig {
    pub variant: DecoderVariant,
    pub wavelet_order: usize,
    pub scale: f64,
    pub inverse_order: usize,
    /// Width of `W3`/`W4` outputs.
    pub hidden: usize,
    pub decoder_graph: DecoderGraph,
}

impl Default for GdnConfig {
    fn default() -> Self {
        Self {
            variant: DecoderVariant::Gdn,
            wavelet_order: DEFAULT_ORDER,
            scale: DEFAULT_SCALE,
            inverse_order: 1,
            hidden: 256,
            decoder_graph: DecoderGraph::Original,
        }
    }
}

impl GdnConfig {
    fn filters(&self) -> Result<DecoderFilters> {
        Ok(DecoderFilters {
            inverse: FilterSpec::inverse_gcn(self.inverse_order).coefficients().into(),
            analysis: FilterSpec::inverse_heat(self.wavelet_order, self.scale)?
                .coefficients()
                .into(),
            synthesis: FilterSpec::heat(self.wavelet_order, self.scale)?.coefficients().into(),
        })
    }
}

#[derive(Clone, Debug)]
struct DecoderFilters {
    inverse: Arc<[f64]>,
    /// `Ψ⁻¹`
    analysis: Arc<[f64]>,
    /// `Ψ`
    synthesis: Arc<[f64]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureLoss {
    Mse,
    /// Sigmoid cross-entropy; decoder outputs are logits.
    Bce,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub structure: f64,
    pub feature: f64,
    pub feature_loss: FeatureLoss,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            structure: 0.0,
            feature: 1.0,
            feature_loss: FeatureLoss::Mse,
        }
    }
}

impl LossWeights {
    fn validate(&self) -> Result<()> {
        let ok = self.structure >= 0.0 && self.feature >= 0.0 && self.structure + self.feature > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(
                "loss weights must be nonnegative with a positive sum".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub encoder: EncoderConfig,
    /// `None` skips pooling and unpooling.
    pub pool: Option<PoolConfig>,
    pub decoder: GdnConfig,
    pub loss: LossWeights,
}

impl ModelConfig {
    /// Defaults for graph-level embedding: encoder `[d, 256, 16]`, 32 clusters,
    /// 128 attention units, GDN decoder on the original graph, cross-entropy
    /// feature loss.
    pub fn embedding_defaults(input_dim: usize) -> Self {
        Self {
            encoder: EncoderConfig::new(vec![input_dim, 256, 16]),
            pool: Some(PoolConfig::default()),
            decoder: GdnConfig::default(),
            loss: LossWeights {
                feature_loss: FeatureLoss::Bce,
                ..LossWeights::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.loss.validate()?;
        if let Some(p) = &self.pool {
            if p.clusters == 0 || p.attention_hidden == 0 {
                return Err(Error::InvalidArgument(
                    "pooling needs positive clusters and hidden units".into(),
                ));
            }
        } else {
            if self.loss.structure > 0.0 {
                return Err(Error::InvalidArgument(
                    "the structure loss needs pooling (A' is undefined)".into(),
                ));
            }
            if self.decoder.decoder_graph == DecoderGraph::Unpooled {
                return Err(Error::InvalidArgument("an unpooled decoder graph needs pooling".into()));
            }
        }
        if self.decoder.hidden == 0 {
            return Err(Error::InvalidArgument("decoder hidden width must be positive".into()));
        }
        FilterSpec::heat(self.decoder.wavelet_order, self.decoder.scale)?;
        Ok(())
    }

    /// Graph embedding width `K · v`, or `v` without pooling.
    pub fn embedding_dim(&self) -> usize {
        self.pool.map_or(1, |p| p.clusters) * self.encoder.output_dim()
    }
}

/// Per-graph constants, computed once and shared across epochs.
#[derive(Clone, Debug)]
pub struct GraphInputs {
    pub num_nodes: usize,
    pub features: Arc<Matrix>,
    /// Reconstruction target; defaults to the features.
    pub target: Arc<Matrix>,
    /// Observed-entry mask for the feature loss; `None` means all entries.
    pub mask: Option<Arc<Matrix>>,
    pub adjacency: Arc<CsrMatrix>,
    pub dense_adjacency: Option<Arc<Matrix>>,
    pub propagation: Arc<CsrMatrix>,
    pub laplacian: Arc<CsrMatrix>,
    pub decoder_propagation: Arc<CsrMatrix>,
}

impl GraphInputs {
    pub fn new(g: &Graph, config: &ModelConfig) -> Result<Self> {
        let x = g.features().ok_or(Error::MissingFeatures)?.clone();
        if x.cols() != config.encoder.input_dim() {
            return Err(Error::shape(
                "GraphInputs",
                format!(
                    "{} feature columns, encoder expects {}",
                    x.cols(),
                    config.encoder.input_dim()
                ),
            ));
        }
        x.ensure_finite("features")?;
        let features = Arc::new(x);
        let propagation = Arc::new(config.encoder.propagation.build(g));
        Ok(Self {
            num_nodes: g.num_nodes(),
            target: features.clone(),
            features,
            mask: None,
            adjacency: Arc::new(g.adjacency()),
            dense_adjacency: (config.loss.structure > 0.0).then(|| Arc::new(g.dense_adjacency())),
            decoder_propagation: propagation.clone(),
            propagation,
            laplacian: Arc::new(build_sym_laplacian(g).into_matrix()),
        })
    }

    /// Replaces the reconstruction target and restricts the loss to `mask`.
    pub fn with_masked_target(mut self, target: Matrix, mask: Matrix) -> Result<Self> {
        if target.shape() != mask.shape() || target.rows() != self.num_nodes {
            return Err(Error::shape("with_masked_target", "target and mask must be n × d"));
        }
        self.target = Arc::new(target);
        self.mask = Some(Arc::new(mask));
        Ok(self)
    }

    pub fn with_target(mut self, target: Matrix) -> Result<Self> {
        if target.rows() != self.num_nodes {
            return Err(Error::shape("with_target", "target must have one row per node"));
        }
        self.target = Arc::new(target);
        Ok(self)
    }
}

/// Parameter handles on a tape, in [`ParamStore`] order.
#[derive(Clone, Debug)]
pub struct ParamVars {
    names: Vec<String>,
    vars: Vec<Var>,
}

impl ParamVars {
    pub fn register(tape: &mut Tape, params: &ParamStore) -> Result<Self> {
        let mut names = Vec::with_capacity(params.len());
        let mut vars = Vec::with_capacity(params.len());
        for (name, m) in params.iter() {
            names.push(name.to_string());
            vars.push(tape.param(m.clone())?);
        }
        Ok(Self { names, vars })
    }

    pub fn get(&self, name: &str) -> Result<Var> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.vars[i])
            .ok_or_else(|| Error::InvalidArgument(format!("missing parameter {name}")))
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// GCN stack: relu between layers, final layer linear.
pub fn encode(tape: &mut Tape, propagation: &Arc<CsrMatrix>, x: Var, weights: &[Var], stack: bool) -> Result<Var> {
    let mut h = x;
    let mut outputs = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let xw = tape.matmul(h, w)?;
        let mut out = tape.spmm_fixed(propagation.clone(), xw)?;
        if i + 1 < weights.len() {
            out = tape.relu(out)?;
        }
        outputs.push(out);
        h = out;
    }
    if stack && outputs.len() > 1 {
        tape.concat_cols(&outputs)
    } else {
        Ok(h)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Pooled {
    pub assignment: Var,
    pub z: Var,
    pub a_pool: Var,
}

/// Attention pooling: `S = softmax(tanh(H W1) W2)`, `Z = SᵀH`, `A_pool = SᵀAS`.
pub fn pool(tape: &mut Tape, h: Var, adjacency: &Arc<CsrMatrix>, w1: Var, w2: Var) -> Result<Pooled> {
    let hw = tape.matmul(h, w1)?;
    let act = tape.tanh(hw)?;
    let logits = tape.matmul(act, w2)?;
    let s = tape.row_softmax(logits)?;
    let st = tape.transpose(s)?;
    let z = tape.matmul(st, h)?;
    let a_s = tape.spmm_fixed(adjacency.clone(), s)?;
    let a_pool = tape.matmul(st, a_s)?;
    Ok(Pooled {
        assignment: s,
        z,
        a_pool,
    })
}

/// `H' = S Z`, `A' = S A_pool Sᵀ`.
pub fn unpool(tape: &mut Tape, s: Var, z: Var, a_pool: Var) -> Result<(Var, Var)> {
    let h_prime = tape.matmul(s, z)?;
    let sa = tape.matmul(s, a_pool)?;
    let st = tape.transpose(s)?;
    let a_prime = tape.matmul(sa, st)?;
    Ok((h_prime, a_prime))
}

/// Graph operators the decoder filters with.
#[derive(Clone, Debug)]
pub struct DecoderOperators {
    pub laplacian: Arc<CsrMatrix>,
    pub propagation: Arc<CsrMatrix>,
}

#[derive(Clone, Copy, Debug)]
pub struct DecoderWeights {
    pub w3: Var,
    pub w4: Var,
    pub w5: Var,
}

/// Runs one of the decoder variants on `h_prime`.
pub fn gdn_decode(
    tape: &mut Tape,
    ops: &DecoderOperators,
    h_prime: Var,
    cfg: &GdnConfig,
    w: DecoderWeights,
) -> Result<Var> {
    let filters = cfg.filters()?;
    let lap = &ops.laplacian;
    match cfg.variant {
        DecoderVariant::Gdn => {
            let filtered = tape.poly_fixed(lap.clone(), filters.inverse.clone(), h_prime)?;
            let m = tape.matmul(filtered, w.w3)?;
            let mw = tape.matmul(m, w.w4)?;
            let coeffs = tape.poly_fixed(lap.clone(), filters.analysis.clone(), mw)?;
            let kept = tape.relu(coeffs)?;
            let back = tape.poly_fixed(lap.clone(), filters.synthesis.clone(), kept)?;
            tape.matmul(back, w.w5)
        }
        DecoderVariant::InverseOnly => {
            let filtered = tape.poly_fixed(lap.clone(), filters.inverse.clone(), h_prime)?;
            let m = tape.matmul(filtered, w.w3)?;
            let mw = tape.matmul(m, w.w4)?;
            let act = tape.relu(mw)?;
            let out = tape.poly_fixed(lap.clone(), filters.inverse.clone(), act)?;
            tape.matmul(out, w.w5)
        }
        DecoderVariant::Gcn => {
            let filtered = tape.spmm_fixed(ops.propagation.clone(), h_prime)?;
            let m = tape.matmul(filtered, w.w3)?;
            let mw = tape.matmul(m, w.w4)?;
            let act = tape.relu(mw)?;
            let out = tape.spmm_fixed(ops.propagation.clone(), act)?;
            tape.matmul(out, w.w5)
        }
    }
}

/// `λ_A · MSE(A, A') + λ_X · f(X, X')`.
pub fn reconstruction_loss(
    tape: &mut Tape,
    weights: &LossWeights,
    structure: Option<(Var, Arc<Matrix>)>,
    x_prime: Var,
    target: Arc<Matrix>,
    mask: Option<Arc<Matrix>>,
) -> Result<Var> {
    let feature = match (weights.feature_loss, mask) {
        (FeatureLoss::Mse, None) => tape.mse_loss(x_prime, target)?,
        (FeatureLoss::Mse, Some(mask)) => tape.masked_mse_loss(x_prime, target, mask)?,
        (FeatureLoss::Bce, None) => tape.bce_loss(x_prime, target)?,
        (FeatureLoss::Bce, Some(_)) => {
            return Err(Error::InvalidArgument("masked cross-entropy is not supported".into()))
        }
    };
    let mut total = tape.scalar_mul(feature, weights.feature)?;
    if weights.structure > 0.0 {
        let (a_prime, a) =
            structure.ok_or_else(|| Error::InvalidArgument("structure loss requested without A'".into()))?;
        let s = tape.mse_loss(a_prime, a)?;
        let s = tape.scalar_mul(s, weights.structure)?;
        total = tape.add(total, s)?;
    }
    Ok(total)
}

/// Tape handles of one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct ForwardVars {
    pub h: Var,
    pub pooled: Option<Pooled>,
    pub h_prime: Var,
    pub a_prime: Option<Var>,
    pub x_prime: Var,
    pub loss: Var,
}

/// Materialized values of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    pub h: Matrix,
    pub assignment: Option<Matrix>,
    pub z: Option<Matrix>,
    pub a_pool: Option<Matrix>,
    pub h_prime: Matrix,
    pub a_prime: Option<Matrix>,
    pub x_prime: Matrix,
    pub loss: f64,
}

/// Configuration plus learnable weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphAutoencoder {
    pub config: ModelConfig,
    pub params: ParamStore,
}

pub fn encoder_param(i: usize) -> String {
    format!("encoder.w{i}")
}

impl GraphAutoencoder {
    /// Glorot-initialized model; the seed fixes every weight.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let dims = &config.encoder.layer_dims;
        for i in 0..dims.len() - 1 {
            params.insert_glorot(&encoder_param(i), dims[i], dims[i + 1], &mut rng);
        }
        let v = config.encoder.output_dim();
        if let Some(p) = &config.pool {
            params.insert_glorot("pool.w1", v, p.attention_hidden, &mut rng);
            params.insert_glorot("pool.w2", p.attention_hidden, p.clusters, &mut rng);
        }
        let h = config.decoder.hidden;
        let d = config.encoder.input_dim();
        params.insert_glorot("decoder.w3", v, h, &mut rng);
        params.insert_glorot("decoder.w4", h, h, &mut rng);
        params.insert_glorot("decoder.w5", h, d, &mut rng);
        Ok(Self { config, params })
    }

    pub fn with_params(config: ModelConfig, params: ParamStore) -> Result<Self> {
        config.validate()?;
        let template = Self::new(config.clone(), 0)?;
        for (name, m) in template.params.iter() {
            let got = params.require(name)?;
            if got.shape() != m.shape() {
                return Err(Error::shape(
                    "GraphAutoencoder::with_params",
                    format!("{name}: {:?} vs expected {:?}", got.shape(), m.shape()),
                ));
            }
        }
        Ok(Self { config, params })
    }

    pub fn prepare(&self, g: &Graph) -> Result<GraphInputs> {
        GraphInputs::new(g, &self.config)
    }

    /// Records the full forward pass and loss on `tape`.
    pub fn forward_on(&self, tape: &mut Tape, vars: &ParamVars, inputs: &GraphInputs) -> Result<ForwardVars> {
        let cfg = &self.config;
        let x = tape.constant((*inputs.features).clone())?;
        let enc_weights = (0..cfg.encoder.layer_dims.len() - 1)
            .map(|i| vars.get(&encoder_param(i)))
            .collect::<Result<Vec<_>>>()?;
        let h = encode(
            tape,
            &inputs.propagation,
            x,
            &enc_weights,
            cfg.encoder.stack_layer_outputs,
        )?;

        let (pooled, h_prime, a_prime) = match &cfg.pool {
            Some(_) => {
                let p = pool(tape, h, &inputs.adjacency, vars.get("pool.w1")?, vars.get("pool.w2")?)?;
                let (h_prime, a_prime) = unpool(tape, p.assignment, p.z, p.a_pool)?;
                (Some(p), h_prime, Some(a_prime))
            }
            None => (None, h, None),
        };

        let ops = match (cfg.decoder.decoder_graph, a_prime) {
            (DecoderGraph::Unpooled, Some(a)) => unpooled_operators(tape.value(a), cfg.encoder.propagation)?,
            _ => DecoderOperators {
                laplacian: inputs.laplacian.clone(),
                propagation: inputs.decoder_propagation.clone(),
            },
        };
        let dw = DecoderWeights {
            w3: vars.get("decoder.w3")?,
            w4: vars.get("decoder.w4")?,
            w5: vars.get("decoder.w5")?,
        };
        let x_prime = gdn_decode(tape, &ops, h_prime, &cfg.decoder, dw)?;

        let structure = match (a_prime, &inputs.dense_adjacency) {
            (Some(a), Some(dense)) => Some((a, dense.clone())),
            (Some(a), None) if cfg.loss.structure > 0.0 => Some((a, Arc::new(inputs.adjacency.to_dense()))),
            _ => None,
        };
        let loss = reconstruction_loss(
            tape,
            &cfg.loss,
            structure,
            x_prime,
            inputs.target.clone(),
            inputs.mask.clone(),
        )?;
        Ok(ForwardVars {
            h,
            pooled,
            h_prime,
            a_prime,
            x_prime,
            loss,
        })
    }

    pub fn forward(&self, inputs: &GraphInputs) -> Result<ForwardOutput> {
        let mut tape = Tape::new();
        let vars = ParamVars::register(&mut tape, &self.params)?;
        let f = self.forward_on(&mut tape, &vars, inputs)?;
        let val = |v: Var| tape.value(v).clone();
        Ok(ForwardOutput {
            h: val(f.h),
            assignment: f.pooled.map(|p| val(p.assignment)),
            z: f.pooled.map(|p| val(p.z)),
            a_pool: f.pooled.map(|p| val(p.a_pool)),
            h_prime: val(f.h_prime),
            a_prime: f.a_prime.map(val),
            x_prime: val(f.x_prime),
            loss: tape.scalar(f.loss),
        })
    }

    /// Loss and its gradient for every parameter, in [`ParamStore`] order.
    pub fn loss_and_grads(&self, inputs: &GraphInputs) -> Result<(f64, Vec<Matrix>)> {
        let mut tape = Tape::new();
        let vars = ParamVars::register(&mut tape, &self.params)?;
        let f = self.forward_on(&mut tape, &vars, inputs)?;
        let mut grads = tape.backward(f.loss)?;
        let out = vars
            .vars()
            .iter()
            .zip(self.params.iter())
            .map(|(&v, (_, m))| grads.take(v).unwrap_or_else(|| Matrix::zeros(m.rows(), m.cols())))
            .collect();
        Ok((tape.scalar(f.loss), out))
    }

    /// Graph-level embedding: `Z` flattened row-major (`H` column means without pooling).
    pub fn embed(&self, inputs: &GraphInputs) -> Result<Vec<f64>> {
        let out = self.forward(inputs)?;
        Ok(match out.z {
            Some(z) => z.into_vec(),
            None => {
                let n = out.h.rows().max(1) as f64;
                (0..out.h.cols())
                    .map(|j| out.h.col_values(j).iter().sum::<f64>() / n)
                    .collect()
            }
        })
    }
}

/// Decoder operators of the graph obtained by thresholding `A'`.
fn unpooled_operators(a_prime: &Matrix, propagation: Propagation) -> Result<DecoderOperators> {
    let n = a_prime.rows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if a_prime.get(i, j) > UNPOOLED_EDGE_THRESHOLD {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    Ok(DecoderOperators {
        laplacian: Arc::new(build_sym_laplacian(&g).into_matrix()),
        propagation: Arc::new(propagation.build(&g)),
    })
}
