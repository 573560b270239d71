use nalgebra::linalg::SymmetricEigen;

use super::state::{Operator, QbState};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, DenseMat, GaussianStream, SparseRatings};

/// Blocked fixed-precision QB factorization with power iteration.
///
/// Each call to [`step`](Self::step) adds one block of `b` basis vectors:
/// sketch the residual range with a Gaussian block, run `p` rounds of
/// projected power iteration, re-orthogonalize against the accumulated basis
/// and update the error indicator `E = E − ‖B_i‖²_F`.
pub struct FixedPrecisionQb<'a> {
    op: Operator<'a>,
    power: usize,
    stream: GaussianStream,
    state: QbState,
}

impl<'a> FixedPrecisionQb<'a> {
    pub fn new(a: &'a SparseRatings, block_size: usize, power: usize, seed: u64) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be >= 1".into()));
        }
        let op = Operator::new(a, false);
        let state = QbState::empty(op.rows(), op.cols(), block_size, a.fro_norm_sq(), false);
        Ok(FixedPrecisionQb {
            op,
            power,
            stream: GaussianStream::new(seed),
            state,
        })
    }

    pub fn state(&self) -> &QbState {
        &self.state
    }

    pub fn into_state(self) -> QbState {
        self.state
    }

    /// Largest rank the loop may reach.
    pub fn rank_cap(&self) -> usize {
        self.op.rows().min(self.op.cols())
    }

    /// Whether another full block still fits under [`rank_cap`](Self::rank_cap).
    pub fn can_step(&self) -> bool {
        self.state.rank() + self.state.block_size <= self.rank_cap()
    }

    pub fn step(&mut self) -> Result<&QbState> {
        if !self.can_step() {
            return Err(Error::Exhausted {
                rank: self.state.rank(),
                cap: self.rank_cap(),
                state: Box::new(self.state.clone()),
            });
        }
        let b = self.state.block_size;
        let (q, bt) = (&self.state.q, &self.state.bt);
        let omega = self.stream.block(self.state.blocks as u32, self.op.cols(), b);

        let mut y = self.op.apply(&omega)?;
        y.sub_matmul(q, &bt.tr_matmul(&omega)?)?;
        let mut qi = orthonormalize(&y);
        for _ in 0..self.power {
            let mut g = self.op.apply_t(&qi)?;
            g.sub_matmul(bt, &q.tr_matmul(&qi)?)?;
            let g = orthonormalize(&g);
            let mut y = self.op.apply(&g)?;
            y.sub_matmul(q, &bt.tr_matmul(&g)?)?;
            qi = orthonormalize(&y);
        }
        let qi = reorthogonalize(q, &qi)?;
        let bti = self.op.apply_t(&qi)?;
        self.state.push_block(&qi, &bti)?;
        self.state.passes = self.op.passes();
        Ok(&self.state)
    }
}

/// `orth(Q_i − Q(QᵀQ_i))`, taken as the trailing columns of a QR of
/// `[Q, Q_i − Q(QᵀQ_i)]` so the block stays orthogonal to `Q` even when the
/// projected block is numerically zero (range already exhausted).
pub(crate) fn reorthogonalize(q: &DenseMat, qi: &DenseMat) -> Result<DenseMat> {
    let k = q.cols();
    if k == 0 {
        return Ok(orthonormalize(qi));
    }
    let mut r = qi.clone();
    r.sub_matmul(q, &q.tr_matmul(qi)?)?;
    let mut stacked = q.clone();
    stacked.append_columns(&r)?;
    Ok(orthonormalize(&stacked).columns(k..k + qi.cols()))
}

/// Fixed-precision randomized QB factorization: grows `Q`, `B` block by block
/// until `‖A − QB‖_F < ε‖A‖_F`, then trims the last block to the smallest rank
/// that still meets the tolerance.
pub fn fixed_precision_qb(
    a: &SparseRatings,
    eps: f64,
    block_size: usize,
    power: usize,
    seed: u64,
) -> Result<QbState> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be in (0, 1), got {eps}")));
    }
    let mut qb = FixedPrecisionQb::new(a, block_size, power, seed)?;
    let tol = eps * eps * a.fro_norm_sq();
    loop {
        let state = qb.step()?;
        if state.error_estimate() < tol {
            let mut state = qb.into_state();
            refine_final_block(&mut state, eps)?;
            return Ok(state);
        }
    }
}

/// Rotates the last block of `Q`/`B` onto the singular directions of `B_l`
/// (largest energy first) and truncates to the smallest rank `k` with
/// `‖A‖² − Σ_{i≤k} ‖B(i,:)‖² < ε²‖A‖²`. Returns `k`.
pub(crate) fn refine_final_block(state: &mut QbState, eps: f64) -> Result<usize> {
    let rank = state.rank();
    if rank == 0 {
        return Ok(0);
    }
    let width = state.block_size.min(rank);
    let start = rank - width;
    let bt_last = state.bt.columns(start..rank);
    let gram = bt_last.tr_matmul(&bt_last)?;
    let eig = SymmetricEigen::new(gram.into_matrix());
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let w = DenseMat::from(eig.eigenvectors).select_columns(&order);

    let q_last = state.q.columns(start..rank).matmul(&w)?;
    let bt_last = bt_last.matmul(&w)?;
    for j in 0..width {
        state.q.column_mut(start + j).copy_from_slice(q_last.column(j));
        state.bt.column_mut(start + j).copy_from_slice(bt_last.column(j));
    }

    let tol = eps * eps * state.a_norm_sq;
    let mut captured = 0.0;
    let mut k = rank;
    for j in 0..rank {
        captured += state.bt.column(j).iter().map(|v| v * v).sum::<f64>();
        if state.a_norm_sq - captured < tol {
            k = j + 1;
            break;
        }
    }
    state.truncate(k);
    Ok(k)
}
