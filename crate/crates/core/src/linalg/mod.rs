//! Dense and sparse kernels shared by the factorizations.

mod dense;
mod factor;
mod gaussian;
mod sparse;

pub use dense::DenseMat;
pub use factor::{
    dense_svd, eig_svd, low_rank_residual_sq, lu_lower_basis, orthonormal_basis, EigSvd,
    SvdTriplet, EIG_FLOOR, RANK_TOL,
};
pub(crate) use factor::{eig_svd_nonsingular, lu_lower_basis_unchecked, orthonormalize};
pub use gaussian::{gaussian_matrix, GaussianStream};
pub use sparse::{sparse_dense_mul, SparseRatings};
pub(crate) use sparse::observed_range;

/// Sum of squared entries of a sparse or dense matrix.
pub trait FroNormSq {
    fn fro_norm_sq(&self) -> f64;
}

impl FroNormSq for DenseMat {
    fn fro_norm_sq(&self) -> f64 {
        DenseMat::fro_norm_sq(self)
    }
}

impl FroNormSq for SparseRatings {
    fn fro_norm_sq(&self) -> f64 {
        SparseRatings::fro_norm_sq(self)
    }
}

pub fn fro_norm_sq<M: FroNormSq + ?Sized>(m: &M) -> f64 {
    m.fro_norm_sq()
}
