use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Column-major dense matrix of finite `f64` values.
///
/// Thin wrapper around [`nalgebra::DMatrix`], which already stores its
/// entries column by column; the wrapper adds the finiteness check at the
/// construction boundary and the handful of products the factorizations need.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMat(DMatrix<f64>);

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMat(DMatrix::identity(n, n))
    }

    /// Builds a matrix from column-major values, rejecting NaN/Inf.
    pub fn from_column_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(DenseMat(DMatrix::from_vec(rows, cols, values)))
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let mut values = Vec::with_capacity(r * c);
        for j in 0..c {
            values.extend(rows.iter().map(|row| row[j]));
        }
        Self::from_column_major(r, c, values)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        DenseMat(DMatrix::from_fn(rows, cols, f))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// Column-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.0.as_mut_slice()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let r = self.rows();
        &self.0.as_slice()[j * r..(j + 1) * r]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.rows();
        &mut self.0.as_mut_slice()[j * r..(j + 1) * r]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> DenseMat {
        DenseMat(self.0.transpose())
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &DenseMat) -> Result<DenseMat> {
        check_inner("matmul", self.shape(), rhs.shape(), self.cols(), rhs.rows())?;
        Ok(DenseMat(&self.0 * &rhs.0))
    }

    /// `selfᵀ · rhs`
    pub fn tr_matmul(&self, rhs: &DenseMat) -> Result<DenseMat> {
        check_inner("tr_matmul", self.shape(), rhs.shape(), self.rows(), rhs.rows())?;
        Ok(DenseMat(self.0.tr_mul(&rhs.0)))
    }

    /// `self · rhsᵀ`
    pub fn matmul_tr(&self, rhs: &DenseMat) -> Result<DenseMat> {
        check_inner("matmul_tr", self.shape(), rhs.shape(), self.cols(), rhs.cols())?;
        Ok(DenseMat(&self.0 * rhs.0.transpose()))
    }

    /// In-place `self -= lhs · rhs`.
    pub fn sub_matmul(&mut self, lhs: &DenseMat, rhs: &DenseMat) -> Result<()> {
        check_inner("sub_matmul", lhs.shape(), rhs.shape(), lhs.cols(), rhs.rows())?;
        if self.shape() != (lhs.rows(), rhs.cols()) {
            return Err(mismatch("sub_matmul", self.shape(), (lhs.rows(), rhs.cols())));
        }
        if lhs.cols() > 0 {
            self.0.gemm(-1.0, &lhs.0, &rhs.0, 1.0);
        }
        Ok(())
    }

    /// `self - other`
    pub fn sub(&self, other: &DenseMat) -> Result<DenseMat> {
        if self.shape() != other.shape() {
            return Err(mismatch("sub", self.shape(), other.shape()));
        }
        Ok(DenseMat(&self.0 - &other.0))
    }

    pub fn scale_columns(&mut self, factors: &[f64]) {
        for (j, &f) in factors.iter().enumerate() {
            self.column_mut(j).iter_mut().for_each(|v| *v *= f);
        }
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> DenseMat {
        DenseMat(self.0.columns(range.start, range.len()).into_owned())
    }

    /// Copy of the columns at `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> DenseMat {
        let r = self.rows();
        let mut values = Vec::with_capacity(r * indices.len());
        for &j in indices {
            values.extend_from_slice(self.column(j));
        }
        DenseMat(DMatrix::from_vec(r, indices.len(), values))
    }

    /// Appends the columns of `other` on the right.
    pub fn append_columns(&mut self, other: &DenseMat) -> Result<()> {
        if self.cols() == 0 {
            *self = other.clone();
            return Ok(());
        }
        if self.rows() != other.rows() {
            return Err(mismatch("append_columns", self.shape(), other.shape()));
        }
        let (r, c) = self.shape();
        let mut values: Vec<f64> = std::mem::replace(&mut self.0, DMatrix::zeros(0, 0))
            .data
            .into();
        values.extend_from_slice(other.as_slice());
        self.0 = DMatrix::from_vec(r, c + other.cols(), values);
        Ok(())
    }

    /// Keeps the first `k` columns.
    pub fn truncate_columns(&mut self, k: usize) {
        if k < self.cols() {
            *self = self.columns(0..k);
        }
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `‖selfᵀ·self − I‖_F`
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.0.tr_mul(&self.0);
        let n = g.nrows();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let d = g[(i, j)] - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

impl From<DMatrix<f64>> for DenseMat {
    fn from(m: DMatrix<f64>) -> Self {
        DenseMat(m)
    }
}

fn check_inner(
    op: &'static str,
    left: (usize, usize),
    right: (usize, usize),
    a: usize,
    b: usize,
) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(mismatch(op, left, right))
    }
}

pub(crate) fn mismatch(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Error {
    Error::DimensionMismatch {
        op,
        left_rows: left.0,
        left_cols: left.1,
        right_rows: right.0,
        right_cols: right.1,
    }
}
