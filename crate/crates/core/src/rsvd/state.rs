use std::cell::Cell;

use crate::error::Result;
use crate::linalg::{low_rank_residual_sq, sparse_dense_mul, DenseMat, SparseRatings};

/// Incremental QB factorization `A ≈ Q·B` built block by block.
///
/// `B` is held transposed (`n × k`) so that appending a block is a column
/// append on column-major storage. When the driver worked on `Aᵀ` (tall
/// inputs) `transposed` is set and `Q·B` approximates `Aᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QbState {
    pub(crate) q: DenseMat,
    pub(crate) bt: DenseMat,
    pub(crate) a_norm_sq: f64,
    pub(crate) error_sq: f64,
    pub(crate) blocks: usize,
    pub(crate) block_size: usize,
    pub(crate) transposed: bool,
    pub(crate) passes: usize,
}

impl QbState {
    pub(crate) fn empty(rows: usize, cols: usize, block_size: usize, a_norm_sq: f64, transposed: bool) -> Self {
        QbState {
            q: DenseMat::zeros(rows, 0),
            bt: DenseMat::zeros(cols, 0),
            a_norm_sq,
            error_sq: a_norm_sq,
            blocks: 0,
            block_size,
            transposed,
            passes: 0,
        }
    }

    /// Orthonormal basis `Q` (rows of the factorized operator × rank).
    pub fn q(&self) -> &DenseMat {
        &self.q
    }

    /// `Bᵀ`, shape (columns of the factorized operator) × rank.
    pub fn bt(&self) -> &DenseMat {
        &self.bt
    }

    /// `B = QᵀA` as a fresh rank × n matrix.
    pub fn b(&self) -> DenseMat {
        self.bt.transpose()
    }

    pub fn rank(&self) -> usize {
        self.q.cols()
    }

    /// Completed blocks `l`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// `‖A‖²_F`
    pub fn a_norm_sq(&self) -> f64 {
        self.a_norm_sq
    }

    /// Running estimate `E = ‖A‖²_F − ‖B‖²_F`, clamped at zero.
    pub fn error_estimate(&self) -> f64 {
        self.error_sq
    }

    /// `sqrt(E) / ‖A‖_F`
    pub fn relative_error(&self) -> f64 {
        if self.a_norm_sq > 0.0 {
            (self.error_sq / self.a_norm_sq).sqrt()
        } else {
            0.0
        }
    }

    /// True when `Q·B` approximates `Aᵀ` rather than `A`.
    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    /// Sparse products with `A` or `Aᵀ` performed so far.
    pub fn passes(&self) -> usize {
        self.passes
    }

    /// `‖A − QB‖²_F` computed explicitly against the original matrix.
    pub fn explicit_residual_sq(&self, a: &SparseRatings) -> Result<f64> {
        if self.transposed {
            low_rank_residual_sq(a, &self.bt, &self.q)
        } else {
            low_rank_residual_sq(a, &self.q, &self.bt)
        }
    }

    /// Dense `Q·B` in the orientation of the original matrix.
    pub fn product(&self) -> DenseMat {
        let p = self.q.matmul_tr(&self.bt).expect("Q and Bᵀ share the rank");
        if self.transposed {
            p.transpose()
        } else {
            p
        }
    }

    /// Keeps the first `k` basis vectors and rows of `B`, recomputing `E`.
    pub fn truncate(&mut self, k: usize) {
        if k >= self.rank() {
            return;
        }
        self.q.truncate_columns(k);
        self.bt.truncate_columns(k);
        self.error_sq = (self.a_norm_sq - self.bt.fro_norm_sq()).max(0.0);
    }

    pub(crate) fn push_block(&mut self, q_block: &DenseMat, bt_block: &DenseMat) -> Result<()> {
        self.q.append_columns(q_block)?;
        self.bt.append_columns(bt_block)?;
        self.error_sq = (self.error_sq - bt_block.fro_norm_sq()).max(0.0);
        self.blocks += 1;
        Ok(())
    }
}

/// `A` or `Aᵀ` viewed as the operator being factorized, counting every
/// sparse product.
pub(crate) struct Operator<'a> {
    a: &'a SparseRatings,
    transposed: bool,
    passes: Cell<usize>,
}

impl<'a> Operator<'a> {
    pub fn new(a: &'a SparseRatings, transposed: bool) -> Self {
        Operator {
            a,
            transposed,
            passes: Cell::new(0),
        }
    }

    pub fn rows(&self) -> usize {
        if self.transposed {
            self.a.cols()
        } else {
            self.a.rows()
        }
    }

    pub fn cols(&self) -> usize {
        if self.transposed {
            self.a.rows()
        } else {
            self.a.cols()
        }
    }

    pub fn transposed(&self) -> bool {
        self.transposed
    }

    pub fn passes(&self) -> usize {
        self.passes.get()
    }

    /// `op · x`
    pub fn apply(&self, x: &DenseMat) -> Result<DenseMat> {
        self.passes.set(self.passes.get() + 1);
        sparse_dense_mul(self.a, x, self.transposed)
    }

    /// `opᵀ · x`
    pub fn apply_t(&self, x: &DenseMat) -> Result<DenseMat> {
        self.passes.set(self.passes.get() + 1);
        sparse_dense_mul(self.a, x, !self.transposed)
    }
}
