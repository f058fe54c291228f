//! Polynomial spectral filters on the symmetric normalized Laplacian.
//!
//! Every filter kind has a closed-form kernel `g(λ)` and a truncated
//! Maclaurin polynomial `Σ cₙ λⁿ`:
//!
//! | kind | kernel | coefficients `cₙ` |
//! |------|--------|-------------------|
//! | low-pass GCN | `1 − λ` | `1, −1` (order ignored) |
//! | inverse GCN | `1 / (1 − λ)` | `1` |
//! | heat wavelet | `e^{−sλ}` | `(−s)ⁿ / n!` |
//! | inverse heat wavelet | `e^{sλ}` | `sⁿ / n!` |
//!
//! [`apply_filter`] evaluates the polynomial in `L` with repeated sparse
//! products. [`apply_filter_exact`] is the dense eigendecomposition oracle
//! `U g(Λ) Uᵀ x` using the untruncated kernel.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{NormalizedOperator, OperatorKind};
use crate::tensor::Matrix;

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_SCALE: f64 = 1.0;
pub const DEFAULT_DENSE_LIMIT: usize = 500;
/// Distance from λ = 1 inside which the closed-form inverse GCN kernel is refused.
pub const POLE_GUARD: f64 = 1e-6;
/// Grid points on `[0, 2]` used by [`truncation_error`].
pub const ERROR_GRID: usize = 2001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    LowPassGcn,
    InverseGcn,
    HeatWavelet,
    InverseHeatWavelet,
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "low_pass" | "low_pass_gcn" | "gcn" => Ok(Self::LowPassGcn),
            "inverse" | "inverse_gcn" => Ok(Self::InverseGcn),
            "heat" | "heat_wavelet" => Ok(Self::HeatWavelet),
            "inverse_heat" | "inverse_heat_wavelet" => Ok(Self::InverseHeatWavelet),
            other => Err(Error::InvalidArgument(format!("unknown filter kind `{other}`"))),
        }
    }
}

/// A polynomial spectral filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    kind: FilterKind,
    order: usize,
    scale: f64,
}

impl FilterSpec {
    /// `scale` must be finite and positive; it only affects the wavelet kinds.
    pub fn new(kind: FilterKind, order: usize, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "filter scale must be positive, got {scale}"
            )));
        }
        Ok(Self { kind, order, scale })
    }

    pub fn low_pass() -> Self {
        Self {
            kind: FilterKind::LowPassGcn,
            order: 1,
            scale: DEFAULT_SCALE,
        }
    }

    pub fn inverse_gcn(order: usize) -> Self {
        Self {
            kind: FilterKind::InverseGcn,
            order,
            scale: DEFAULT_SCALE,
        }
    }

    pub fn heat(order: usize, scale: f64) -> Result<Self> {
        Self::new(FilterKind::HeatWavelet, order, scale)
    }

    pub fn inverse_heat(order: usize, scale: f64) -> Result<Self> {
        Self::new(FilterKind::InverseHeatWavelet, order, scale)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Polynomial coefficients `c₀ … c_order`.
    pub fn coefficients(&self) -> Vec<f64> {
        match self.kind {
            FilterKind::LowPassGcn => vec![1.0, -1.0],
            FilterKind::InverseGcn => vec![1.0; self.order + 1],
            FilterKind::HeatWavelet => taylor_exp(-self.scale, self.order),
            FilterKind::InverseHeatWavelet => taylor_exp(self.scale, self.order),
        }
    }

    /// The untruncated kernel at `lambda`.
    pub fn kernel(&self, lambda: f64) -> Result<f64> {
        Ok(match self.kind {
            FilterKind::LowPassGcn => 1.0 - lambda,
            FilterKind::InverseGcn => {
                if (1.0 - lambda).abs() < POLE_GUARD {
                    return Err(Error::Pole {
                        lambda,
                        guard: POLE_GUARD,
                    });
                }
                1.0 / (1.0 - lambda)
            }
            FilterKind::HeatWavelet => (-self.scale * lambda).exp(),
            FilterKind::InverseHeatWavelet => (self.scale * lambda).exp(),
        })
    }

    fn eval_poly(&self, lambda: f64) -> f64 {
        self.coefficients().iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
    }
}

/// `(x)ⁿ / n!` for n = 0..=order.
fn taylor_exp(x: f64, order: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut term = 1.0;
    coeffs.push(term);
    for n in 1..=order {
        term *= x / n as f64;
        coeffs.push(term);
    }
    coeffs
}

/// Truncated polynomial response at `lambda ∈ [0, 2]`.
pub fn response(spec: &FilterSpec, lambda: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} outside the normalized Laplacian spectrum [0, 2]"
        )));
    }
    Ok(spec.eval_poly(lambda))
}

fn require_laplacian(l: &NormalizedOperator) -> Result<()> {
    if l.kind() != OperatorKind::SymLaplacian {
        return Err(Error::InvalidArgument(format!(
            "spectral filters act on the symmetric Laplacian, got {:?}",
            l.kind()
        )));
    }
    Ok(())
}

/// `Σ cₙ Lⁿ x` by Horner's rule over sparse products.
pub fn apply_filter(spec: &FilterSpec, l: &NormalizedOperator, x: &Matrix) -> Result<Matrix> {
    require_laplacian(l)?;
    l.matrix().poly_apply(&spec.coefficients(), x, false)
}

/// Dense eigendecomposition `L = U Λ Uᵀ` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Matrix,
}

impl SpectralBasis {
    pub fn of(op: &NormalizedOperator, limit: usize) -> Result<Self> {
        Self::of_dense(&op.to_dense(), limit)
    }

    pub fn of_dense(m: &Matrix, limit: usize) -> Result<Self> {
        let n = m.rows();
        if n > limit {
            return Err(Error::TooLarge { n, limit });
        }
        if m.cols() != n {
            return Err(Error::shape("SpectralBasis", "matrix must be square"));
        }
        let dm = DMatrix::from_row_slice(n, n, m.data());
        let eig = SymmetricEigen::new(dm);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Spectral coefficients `Uᵀ x`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.eigenvectors.t_matmul(x)
    }

    /// `U diag(g) Uᵀ x`
    pub fn apply(&self, gains: &[f64], x: &Matrix) -> Result<Matrix> {
        let mut coeffs = self.transform(x)?;
        for (k, &g) in gains.iter().enumerate() {
            for v in coeffs.row_mut(k) {
                *v *= g;
            }
        }
        self.eigenvectors.matmul(&coeffs)
    }
}

/// Oracle `U g(Λ) Uᵀ x` with the closed-form kernel.
pub fn apply_filter_exact(spec: &FilterSpec, l: &NormalizedOperator, x: &Matrix) -> Result<Matrix> {
    apply_filter_exact_with_limit(spec, l, x, DEFAULT_DENSE_LIMIT)
}

pub fn apply_filter_exact_with_limit(
    spec: &FilterSpec,
    l: &NormalizedOperator,
    x: &Matrix,
    limit: usize,
) -> Result<Matrix> {
    require_laplacian(l)?;
    if x.rows() != l.dim() {
        return Err(Error::shape(
            "apply_filter_exact",
            format!("{n}x{n} operator on {:?}", x.shape(), n = l.dim()),
        ));
    }
    let basis = SpectralBasis::of(l, limit)?;
    let gains = basis
        .eigenvalues
        .iter()
        .map(|&lam| spec.kernel(lam))
        .collect::<Result<Vec<_>>>()?;
    basis.apply(&gains, x)
}

/// Worst absolute gap between the closed-form kernel and its truncation on
/// an even grid of [`ERROR_GRID`] points over `[0, 2]`. The inverse GCN kernel
/// has a pole inside the interval, so its error is infinite.
pub fn truncation_error(spec: &FilterSpec) -> f64 {
    if spec.kind == FilterKind::InverseGcn {
        return f64::INFINITY;
    }
    (0..ERROR_GRID)
        .map(|i| {
            let lam = 2.0 * i as f64 / (ERROR_GRID - 1) as f64;
            let exact = spec.kernel(lam).expect("no pole for this kind");
            (exact - spec.eval_poly(lam)).abs()
        })
        .fold(0.0, f64::max)
}

/// One row of a frequency-response table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponsePoint {
    pub lambda: f64,
    pub truncated: f64,
    /// `None` where the closed form is undefined (the inverse GCN pole).
    pub exact: Option<f64>,
}

/// Samples `points` evenly spaced λ values over `[0, 2]`.
pub fn response_table(spec: &FilterSpec, points: usize) -> Vec<ResponsePoint> {
    let denom = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|i| {
            let lambda = 2.0 * i as f64 / denom;
            ResponsePoint {
                lambda,
                truncated: spec.eval_poly(lambda),
                exact: spec.kernel(lambda).ok(),
            }
        })
        .collect()
}
