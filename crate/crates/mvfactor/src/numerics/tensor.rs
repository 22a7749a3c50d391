//! Dense row-major f64 matrix.
//!
//! `Tensor2D` is the single numeric carrier for batches, parameters, and
//! gradients. Public constructors and arithmetic reject non-finite entries
//! so NaN/Inf cannot propagate silently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2D {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dimension(
                "Tensor2D::new",
                format!(
                    "{rows}x{cols} needs {} values, got {}",
                    rows * cols,
                    data.len()
                ),
            ));
        }
        let t = Tensor2D { rows, cols, data };
        t.check_finite("Tensor2D::new")?;
        Ok(t)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2D {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("from_rows: empty row list".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dimension("Tensor2D::from_rows", "ragged rows"));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Tensor2D::new(rows.len(), cols, data)
    }

    /// Entries drawn i.i.d. N(0, scale^2).
    pub fn randn(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Self {
        let data = (0..rows * cols).map(|_| scale * rng.normal()).collect();
        Tensor2D { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(
                context,
                format!(
                    "non-finite entry at ({}, {})",
                    pos / self.cols.max(1),
                    pos % self.cols.max(1)
                ),
            ));
        }
        Ok(())
    }

    /// C = A * B with A = self [m x k], B [k x n].
    pub fn matmul(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != rhs.rows {
            return Err(Error::dimension(
                "matmul",
                format!("{}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let mut out = Tensor2D::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let c_row = out.row_mut(i);
            for (k, &a) in a_row.iter().enumerate() {
                let b_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out.check_finite("matmul")?;
        Ok(out)
    }

    /// C = A * B^T with A = self [m x k], B [n x k]. This is the hot kernel
    /// for `x * W^T` with row-major [out x in] weights.
    pub fn matmul_transpose_b(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != rhs.cols {
            return Err(Error::dimension(
                "matmul_transpose_b",
                format!(
                    "{}x{} * ({}x{})^T",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let mut out = Tensor2D::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let c_row = out.row_mut(i);
            for (j, c) in c_row.iter_mut().enumerate() {
                *c = dot(a_row, rhs.row(j));
            }
        }
        out.check_finite("matmul_transpose_b")?;
        Ok(out)
    }

    /// C = A^T * B with A = self [k x m], B [k x n].
    pub fn matmul_transpose_a(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.rows != rhs.rows {
            return Err(Error::dimension(
                "matmul_transpose_a",
                format!(
                    "({}x{})^T * {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let mut out = Tensor2D::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                let c_row = out.row_mut(i);
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out.check_finite("matmul_transpose_a")?;
        Ok(out)
    }

    pub fn transpose(&self) -> Tensor2D {
        let mut out = Tensor2D::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Tensor2D) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dimension(
                "add_assign",
                format!(
                    "{}x{} += {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Column-wise concatenation; all parts must share the row count.
    pub fn concat_cols(parts: &[&Tensor2D]) -> Result<Tensor2D> {
        if parts.is_empty() {
            return Err(Error::Input("concat_cols: no parts".into()));
        }
        let rows = parts[0].rows;
        if parts.iter().any(|p| p.rows != rows) {
            return Err(Error::dimension("concat_cols", "row counts differ"));
        }
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Tensor2D::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            let row = out.row_mut(r);
            for p in parts {
                row[offset..offset + p.cols].copy_from_slice(p.row(r));
                offset += p.cols;
            }
        }
        Ok(out)
    }

    /// Copy of the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Tensor2D> {
        let mut out = Tensor2D::zeros(indices.len(), self.cols);
        for (r, &i) in indices.iter().enumerate() {
            if i >= self.rows {
                return Err(Error::Input(format!(
                    "select_rows: index {i} out of range 0..{}",
                    self.rows
                )));
            }
            out.row_mut(r).copy_from_slice(self.row(i));
        }
        Ok(out)
    }

    pub fn col_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (m, &v) in means.iter_mut().zip(self.row(r)) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators so the reduction vectorizes; order is fixed, so the
    // result is bit-identical across runs.
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// Cholesky factor L (lower triangular, row-major) of a symmetric positive
/// definite matrix. Fails if the matrix is not SPD.
pub fn cholesky(a: &Tensor2D) -> Result<Tensor2D> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dimension("cholesky", "matrix not square"));
    }
    let mut l = Tensor2D::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::numeric(
                        "cholesky",
                        format!("matrix not positive definite at pivot {i} (value {sum})"),
                    ));
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// log(det A) of an SPD matrix via its Cholesky factor.
pub fn log_det_spd(a: &Tensor2D) -> Result<f64> {
    let l = cholesky(a)?;
    let mut acc = 0.0;
    for i in 0..a.rows() {
        acc += l.get(i, i).ln();
    }
    Ok(2.0 * acc)
}

/// Solves A x = b for SPD A using the Cholesky factorization.
pub fn solve_spd(a: &Tensor2D, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if b.len() != n {
        return Err(Error::dimension("solve_spd", "rhs length mismatch"));
    }
    let l = cholesky(a)?;
    // Forward substitution: L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    // Back substitution: L^T x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    Ok(x)
}

/// Numerically stable log(sum(exp(values))).
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
