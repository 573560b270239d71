//! Sparse randomized low-rank factorization and model-based collaborative
//! filtering with automatically chosen latent dimension.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] holds the dense/sparse kernels (Gaussian sketches,
//!   orthonormalization, LU bases, eigendecomposition-based SVD).
//! * [`rsvd`] implements the basic randomized SVD, the fixed-precision
//!   blocked QB factorization and the fast adaptive PCA driver with a
//!   pluggable termination criterion.
//! * [`cf`] turns QB states into item latent factors, predicts ratings by
//!   latent cosine similarity and grows the latent dimension until the
//!   validation MAE bottoms out.
//! * [`data`] reads ratings CSV and Matrix Market files, prunes sparse
//!   rows/columns and produces seeded train/validation/test splits.

pub mod cf;
pub mod data;
pub mod error;
pub mod linalg;
pub mod rsvd;

pub use error::{Error, Result};
pub use linalg::{DenseMat, SparseRatings, SvdTriplet};
