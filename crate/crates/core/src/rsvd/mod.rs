//! Randomized low-rank factorizations of sparse matrices.
//!
//! * [`basic_rsvd`]: fixed-rank randomized SVD with power iteration.
//! * [`fixed_precision_qb`]: blocked QB growth until a Frobenius tolerance is
//!   met, tracking the error as `‖A‖²_F − ‖B‖²_F`.
//! * [`adaptive_pca`]: the sparse-friendly block loop (LU in place of most
//!   orthonormalizations, any pass count) with a pluggable
//!   [`TerminationCriterion`] and an eigendecomposition-based final SVD.

mod adaptive;
mod basic;
mod criterion;
mod qb;
mod state;

pub use adaptive::{
    adaptive_pca, adaptive_pca_with_state, svd_from_qb, AdaptiveQb, DEFAULT_BLOCK, DEFAULT_PASSES,
};
pub use basic::basic_rsvd;
pub use criterion::TerminationCriterion;
pub use qb::{fixed_precision_qb, FixedPrecisionQb};
pub use state::QbState;
