//! Compressed sparse row matrices and the sparse-dense kernels built on them.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// CSR matrix with sorted column indices within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::shape(
                "CsrMatrix::from_triplets",
                format!("entry ({r}, {c}) outside {rows}x{cols}"),
            ));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` over the stored entries of row `i`.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                out.set(i, j, v);
            }
        }
        out
    }

    /// `self · x`
    pub fn spmm(&self, x: &Matrix) -> Result<Matrix> {
        if self.cols != x.rows() {
            return Err(Error::shape(
                "spmm",
                format!("{}x{} sparse x {:?}", self.rows, self.cols, x.shape()),
            ));
        }
        let c = x.cols();
        let mut out = Matrix::zeros(self.rows, c);
        for i in 0..self.rows {
            let out_row = out.row_mut(i);
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = self.values[k];
                let x_row = x.row(self.indices[k]);
                for (o, &b) in out_row.iter_mut().zip(x_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · x`, scattering rows of `x`.
    pub fn spmm_t(&self, x: &Matrix) -> Result<Matrix> {
        if self.rows != x.rows() {
            return Err(Error::shape(
                "spmm_t",
                format!("({}x{} sparse)ᵀ x {:?}", self.rows, self.cols, x.shape()),
            ));
        }
        let mut out = Matrix::zeros(self.cols, x.cols());
        for i in 0..self.rows {
            let x_row = x.row(i);
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = self.values[k];
                let out_row = out.row_mut(self.indices[k]);
                for (o, &b) in out_row.iter_mut().zip(x_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Evaluates `Σ coeffs[k] · selfᵏ · x` (or with `selfᵀ` when `transpose`)
    /// by Horner's rule, using one sparse product per degree. Powers of the
    /// operator are never formed.
    pub fn poly_apply(&self, coeffs: &[f64], x: &Matrix, transpose: bool) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::shape("poly_apply", "operator is not square"));
        }
        if self.cols != x.rows() {
            return Err(Error::shape(
                "poly_apply",
                format!("{}x{} operator on {:?}", self.rows, self.cols, x.shape()),
            ));
        }
        let Some((&top, rest)) = coeffs.split_last() else {
            return Ok(Matrix::zeros(x.rows(), x.cols()));
        };
        let mut acc = x.scale(top);
        for &c in rest.iter().rev() {
            acc = if transpose {
                self.spmm_t(&acc)?
            } else {
                self.spmm(&acc)?
            };
            acc.axpy(c, x)?;
        }
        Ok(acc)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| self.row_entries(i).all(|(j, v)| (self.get(j, i) - v).abs() <= tol))
    }
}
