//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records each operation together with its forward value. Nodes
//! are appended in evaluation order, so the tape is topologically sorted and
//! [`Tape::backward`] visits every node exactly once in reverse. The
//! operation set is closed: exactly what the autoencoder needs, with no
//! broadcasting.
//!
//! Conventions: the relu subgradient at 0 is 0, and the derivatives of tanh
//! and sigmoid are computed from the cached outputs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::tensor::Matrix;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf { trainable: bool },
    MatMul(Var, Var),
    Add(Var, Var),
    Tanh(Var),
    Relu(Var),
    Sigmoid(Var),
    RowSoftmax(Var),
    Transpose(Var),
    ScalarMul(Var, f64),
    Spmm(Arc<CsrMatrix>, Var),
    Poly(Arc<CsrMatrix>, Arc<[f64]>, Var),
    ConcatCols(Vec<Var>),
    Sum(Var),
    Mse(Var, Arc<Matrix>),
    MaskedMse(Var, Arc<Matrix>, Arc<Matrix>),
    Bce(Var, Arc<Matrix>),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Matrix,
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`. Nodes the loss does not
    /// depend on have no entry.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Matrix> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

/// Single-threaded operation record.
#[derive(Default, Debug)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Scalar value of a 1×1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.get(0, 0)
    }

    fn push(&mut self, op: Op, value: Matrix, what: &'static str) -> Result<Var> {
        value.ensure_finite(what)?;
        self.nodes.push(Node { op, value });
        Ok(Var(self.nodes.len() - 1))
    }

    /// A trainable input whose gradient is reported by [`Tape::backward`].
    pub fn param(&mut self, value: Matrix) -> Result<Var> {
        self.push(Op::Leaf { trainable: true }, value, "param")
    }

    /// A constant input.
    pub fn constant(&mut self, value: Matrix) -> Result<Var> {
        self.push(Op::Leaf { trainable: false }, value, "constant")
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        self.push(Op::MatMul(a, b), value, "matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        self.push(Op::Add(a, b), value, "add")
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(f64::tanh);
        self.push(Op::Tanh(a), value, "tanh")
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(|v| v.max(0.0));
        self.push(Op::Relu(a), value, "relu")
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(sigmoid);
        self.push(Op::Sigmoid(a), value, "sigmoid")
    }

    pub fn row_softmax(&mut self, a: Var) -> Result<Var> {
        let mut value = self.value(a).clone();
        for i in 0..value.rows() {
            let row = value.row_mut(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        self.push(Op::RowSoftmax(a), value, "row_softmax")
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).transpose();
        self.push(Op::Transpose(a), value, "transpose")
    }

    pub fn scalar_mul(&mut self, a: Var, alpha: f64) -> Result<Var> {
        let value = self.value(a).scale(alpha);
        self.push(Op::ScalarMul(a, alpha), value, "scalar_mul")
    }

    /// Constant sparse operator times a tape value.
    pub fn spmm_fixed(&mut self, op: Arc<CsrMatrix>, a: Var) -> Result<Var> {
        let value = op.spmm(self.value(a))?;
        self.push(Op::Spmm(op, a), value, "spmm_fixed")
    }

    /// `Σ coeffs[k] · opᵏ · a` with a constant square sparse operator.
    pub fn poly_fixed(&mut self, op: Arc<CsrMatrix>, coeffs: Arc<[f64]>, a: Var) -> Result<Var> {
        let value = op.poly_apply(&coeffs, self.value(a), false)?;
        self.push(Op::Poly(op, coeffs, a), value, "poly_fixed")
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let mats: Vec<&Matrix> = parts.iter().map(|&p| self.value(p)).collect();
        let value = Matrix::hconcat(&mats)?;
        self.push(Op::ConcatCols(parts.to_vec()), value, "concat_cols")
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let value = Matrix::filled(1, 1, self.value(a).sum());
        self.push(Op::Sum(a), value, "sum")
    }

    /// Mean squared error against a constant target.
    pub fn mse_loss(&mut self, pred: Var, target: Arc<Matrix>) -> Result<Var> {
        let p = self.value(pred);
        check_same(p, &target, "mse_loss")?;
        target.ensure_finite("mse_loss target")?;
        let count = p.len().max(1) as f64;
        let value = p.sub(&target)?.frobenius_sq() / count;
        self.push(Op::Mse(pred, target), Matrix::filled(1, 1, value), "mse_loss")
    }

    /// Squared error averaged over the entries where `mask` is nonzero.
    /// Mask entries are used as weights; pass 0/1 for plain masking.
    pub fn masked_mse_loss(&mut self, pred: Var, target: Arc<Matrix>, mask: Arc<Matrix>) -> Result<Var> {
        let p = self.value(pred);
        check_same(p, &target, "masked_mse_loss")?;
        check_same(p, &mask, "masked_mse_loss")?;
        target.ensure_finite("masked_mse_loss target")?;
        let count = mask.data().iter().filter(|&&m| m != 0.0).count().max(1) as f64;
        let value: f64 = p
            .data()
            .iter()
            .zip(target.data())
            .zip(mask.data())
            .filter(|(_, &m)| m != 0.0)
            .map(|((&a, &b), &m)| m * (a - b) * (a - b))
            .sum::<f64>()
            / count;
        self.push(
            Op::MaskedMse(pred, target, mask),
            Matrix::filled(1, 1, value),
            "masked_mse_loss",
        )
    }

    /// Element-wise sigmoid cross-entropy of `logits` against targets in [0, 1],
    /// averaged over entries.
    pub fn bce_loss(&mut self, logits: Var, target: Arc<Matrix>) -> Result<Var> {
        let p = self.value(logits);
        check_same(p, &target, "bce_loss")?;
        if target.data().iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidArgument("bce_loss targets must lie in [0, 1]".into()));
        }
        let count = p.len().max(1) as f64;
        // max(x, 0) − x·t + log(1 + e^{−|x|})
        let value: f64 = p
            .data()
            .iter()
            .zip(target.data())
            .map(|(&x, &t)| x.max(0.0) - x * t + (-x.abs()).exp().ln_1p())
            .sum::<f64>()
            / count;
        self.push(Op::Bce(logits, target), Matrix::filled(1, 1, value), "bce_loss")
    }

    /// Back-propagates from a 1×1 `loss`. Gradients are returned for every
    /// node the loss depends on.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).shape() != (1, 1) {
            return Err(Error::shape(
                "backward",
                format!("loss must be 1x1, got {:?}", self.value(loss).shape()),
            ));
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Matrix::filled(1, 1, 1.0));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            self.propagate(&node.op, &node.value, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, op: &Op, out: &Matrix, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let mut send = |v: Var, delta: Matrix| -> Result<()> {
            match &mut grads[v.0] {
                Some(acc) => acc.add_assign(&delta),
                slot @ None => {
                    *slot = Some(delta);
                    Ok(())
                }
            }
        };
        match op {
            Op::Leaf { .. } => {}
            Op::MatMul(a, b) => {
                send(*a, g.matmul_t(self.value(*b))?)?;
                send(*b, self.value(*a).t_matmul(g)?)?;
            }
            Op::Add(a, b) => {
                send(*a, g.clone())?;
                send(*b, g.clone())?;
            }
            Op::Tanh(a) => send(*a, g.hadamard(&out.map(|y| 1.0 - y * y))?)?,
            Op::Relu(a) => {
                let mask = self.value(*a).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
                send(*a, g.hadamard(&mask)?)?;
            }
            Op::Sigmoid(a) => send(*a, g.hadamard(&out.map(|y| y * (1.0 - y)))?)?,
            Op::RowSoftmax(a) => {
                let mut d = Matrix::zeros(out.rows(), out.cols());
                for i in 0..out.rows() {
                    let (y, gy) = (out.row(i), g.row(i));
                    let inner: f64 = y.iter().zip(gy).map(|(a, b)| a * b).sum();
                    for (j, dv) in d.row_mut(i).iter_mut().enumerate() {
                        *dv = y[j] * (gy[j] - inner);
                    }
                }
                send(*a, d)?;
            }
            Op::Transpose(a) => send(*a, g.transpose())?,
            Op::ScalarMul(a, alpha) => send(*a, g.scale(*alpha))?,
            Op::Spmm(m, a) => send(*a, m.spmm_t(g)?)?,
            Op::Poly(m, coeffs, a) => send(*a, m.poly_apply(coeffs, g, true)?)?,
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let c = self.value(p).cols();
                    let piece = Matrix::from_fn(g.rows(), c, |i, j| g.get(i, offset + j));
                    offset += c;
                    send(p, piece)?;
                }
            }
            Op::Sum(a) => {
                let (r, c) = self.value(*a).shape();
                send(*a, Matrix::filled(r, c, g.get(0, 0)))?;
            }
            Op::Mse(a, target) => {
                let p = self.value(*a);
                let scale = 2.0 * g.get(0, 0) / p.len().max(1) as f64;
                send(*a, p.sub(target)?.scale(scale))?;
            }
            Op::MaskedMse(a, target, mask) => {
                let p = self.value(*a);
                let count = mask.data().iter().filter(|&&m| m != 0.0).count().max(1) as f64;
                let scale = 2.0 * g.get(0, 0) / count;
                let d = p.sub(target)?.hadamard(mask)?.scale(scale);
                send(*a, d)?;
            }
            Op::Bce(a, target) => {
                let p = self.value(*a);
                let scale = g.get(0, 0) / p.len().max(1) as f64;
                let d = Matrix::from_fn(p.rows(), p.cols(), |i, j| {
                    scale * (sigmoid(p.get(i, j)) - target.get(i, j))
                });
                send(*a, d)?;
            }
        }
        Ok(())
    }

    /// Whether `v` was created with [`Tape::param`].
    pub fn is_param(&self, v: Var) -> bool {
        matches!(self.nodes[v.0].op, Op::Leaf { trainable: true })
    }
}

fn check_same(a: &Matrix, b: &Matrix, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
