use super::criterion::{CriterionState, Decision, TerminationCriterion};
use super::qb::reorthogonalize;
use super::state::{Operator, QbState};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_svd_nonsingular, lu_lower_basis_unchecked, orthonormalize, GaussianStream, SparseRatings,
    SvdTriplet,
};

/// Default block size `b`.
pub const DEFAULT_BLOCK: usize = 20;
/// Default pass count `q`.
pub const DEFAULT_PASSES: usize = 10;

/// Block engine of the fast adaptive PCA.
///
/// Works on `A` when `m ≤ n` and on `Aᵀ` otherwise, so the basis `Q` always
/// lives in the smaller dimension. Each block costs exactly `q` sparse
/// products: for even `q` the block starts from a Gaussian sketch of the
/// deflated range and LU-normalizes it, for odd `q` it starts from a Gaussian
/// basis directly; power rounds use LU except the last, which
/// orthonormalizes.
pub struct AdaptiveQb<'a> {
    op: Operator<'a>,
    passes: usize,
    stream: GaussianStream,
    state: QbState,
}

impl<'a> AdaptiveQb<'a> {
    pub fn new(a: &'a SparseRatings, block_size: usize, passes: usize, seed: u64) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be >= 1".into()));
        }
        if passes < 2 {
            return Err(Error::InvalidArgument(format!("pass count must be >= 2, got {passes}")));
        }
        let op = Operator::new(a, a.rows() > a.cols());
        let state = QbState::empty(op.rows(), op.cols(), block_size, a.fro_norm_sq(), op.transposed());
        Ok(AdaptiveQb {
            op,
            passes,
            stream: GaussianStream::new(seed),
            state,
        })
    }

    pub fn state(&self) -> &QbState {
        &self.state
    }

    pub(crate) fn state_mut(&mut self) -> &mut QbState {
        &mut self.state
    }

    pub fn into_state(self) -> QbState {
        self.state
    }

    pub fn rank_cap(&self) -> usize {
        self.op.rows()
    }

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
        let block = self.state.blocks as u32;
        let (q, bt) = (&self.state.q, &self.state.bt);

        let mut ql = if self.passes % 2 == 0 {
            let omega = self.stream.block(block, self.op.cols(), b);
            let mut y = self.op.apply(&omega)?;
            y.sub_matmul(q, &bt.tr_matmul(&omega)?)?;
            lu_lower_basis_unchecked(&y)
        } else {
            self.stream.block(block, self.op.rows(), b)
        };
        let rounds = (self.passes - 1) / 2;
        for t in 1..=rounds {
            let r = self.op.apply_t(&ql)?;
            let mut y = self.op.apply(&r)?;
            // deflating every round (not only the last) keeps the range equal
            // to the power-iterated fixed-precision QB's
            y.sub_matmul(q, &bt.tr_matmul(&r)?)?;
            ql = if t == rounds {
                orthonormalize(&y)
            } else {
                lu_lower_basis_unchecked(&y)
            };
        }
        let ql = reorthogonalize(q, &ql)?;
        let btl = self.op.apply_t(&ql)?;
        self.state.push_block(&ql, &btl)?;
        self.state.passes = self.op.passes();
        Ok(&self.state)
    }
}

/// Top-`rank` singular triplets of `A` from the first `keep` rows of a QB
/// state, via the eigendecomposition-based SVD of `Bᵀ`.
pub fn svd_from_qb(state: &QbState, keep: usize, rank: usize) -> Result<SvdTriplet> {
    let keep = keep.min(state.rank());
    if rank > keep {
        return Err(Error::InvalidArgument(format!(
            "requested rank {rank} exceeds basis size {keep}"
        )));
    }
    let bt = state.bt.columns(0..keep);
    let q = state.q.columns(0..keep);
    let eig = eig_svd_nonsingular(&bt)?;
    let available = eig.s.len();
    if available < rank {
        return Err(Error::NearSingular {
            index: keep - available - 1,
            eigenvalue: 0.0,
            floor: crate::linalg::EIG_FLOOR * bt.fro_norm_sq(),
        });
    }
    // ascending order: the top `rank` components are the tail, reversed
    let ind: Vec<usize> = (available - rank..available).rev().collect();
    let u = q.matmul(&eig.v.select_columns(&ind))?;
    let s = ind.iter().map(|&i| eig.s[i]).collect();
    let v = eig.u.select_columns(&ind);
    let svd = SvdTriplet { u, s, v };
    Ok(if state.transposed { svd.transposed() } else { svd })
}

/// Fast adaptive PCA for sparse data with a pluggable termination criterion.
pub fn adaptive_pca(
    a: &SparseRatings,
    block_size: usize,
    passes: usize,
    criterion: TerminationCriterion<'_>,
    seed: u64,
) -> Result<SvdTriplet> {
    adaptive_pca_with_state(a, block_size, passes, criterion, seed).map(|(svd, _)| svd)
}

/// [`adaptive_pca`] that also hands back the (trimmed) QB state.
pub fn adaptive_pca_with_state(
    a: &SparseRatings,
    block_size: usize,
    passes: usize,
    criterion: TerminationCriterion<'_>,
    seed: u64,
) -> Result<(SvdTriplet, QbState)> {
    if let TerminationCriterion::FixedRank(k) = criterion {
        if k > a.rows().min(a.cols()) {
            return Err(Error::InvalidArgument(format!(
                "rank {k} exceeds min dimension {}",
                a.rows().min(a.cols())
            )));
        }
    }
    let mut crit = CriterionState::new(criterion, a)?;
    let mut engine = AdaptiveQb::new(a, block_size, passes, seed)?;
    let (keep, rank) = loop {
        if !engine.can_step() {
            if let Some(best) = crit.on_exhaustion() {
                break (best, best);
            }
            return Err(Error::Exhausted {
                rank: engine.state().rank(),
                cap: engine.rank_cap(),
                state: Box::new(engine.into_state()),
            });
        }
        engine.step()?;
        if let Decision::Stop { keep, rank } = crit.check(engine.state_mut())? {
            break (keep, rank);
        }
    };
    let mut state = engine.into_state();
    state.truncate(keep);
    let svd = svd_from_qb(&state, keep, rank)?;
    Ok((svd, state))
}
