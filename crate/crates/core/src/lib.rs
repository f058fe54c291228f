//! Graph autoencoders with spectral-wavelet graph deconvolution decoders.
//!
//! The encoder smooths node features with GCN layers (a low-pass filter) and
//! coarsens the graph with attention pooling. The decoder unpools and then
//! reconstructs features with a graph deconvolution: a truncated inverse
//! filter that re-amplifies high frequencies, followed by learned relu
//! thresholding in a heat-kernel wavelet domain that removes the amplified
//! noise. All spectral operators are truncated Maclaurin polynomials of the
//! symmetric normalized Laplacian, so no eigendecomposition is needed outside
//! of the test oracles.
//!
//! Crate layout:
//!
//! - [`graph`], [`sparse`]: graphs, normalized operators, sparse products
//! - [`tensor`], [`autodiff`], [`optim`], [`params`]: the learning stack
//! - [`spectral`]: polynomial filters and the dense spectral oracle
//! - [`model`]: encoder, pooling, unpooling, decoders, loss
//! - [`train`]: seeded training loops and checkpoints
//! - [`tasks`]: reconstruction ablation, graph classification, recommendation
//! - [`io`]: dataset loaders, config files, CSV outputs

pub mod autodiff;
pub mod error;
pub mod graph;
pub mod io;
pub mod model;
pub mod optim;
pub mod params;
pub mod sparse;
pub mod spectral;
pub mod tasks;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Graph, NormalizedOperator, OperatorKind};
pub use tensor::Matrix;
