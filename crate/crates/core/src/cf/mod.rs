//! Model-based collaborative filtering on top of the adaptive PCA.
//!
//! Item latent factors `T = Σ^½Vᵀ` come from the QB state; an unknown rating
//! `A(i, j)` is predicted as the average of user `i`'s known ratings weighted
//! by the cosine similarity of the latent vectors of item `j` and each rated
//! item. [`auto_latent_factors`] grows the factorization block by block and
//! keeps the latent dimension with the lowest validation MAE.

mod auto;
mod latent;
mod metrics;
mod predict;

pub use auto::{
    auto_latent_factors, auto_latent_factors_monitored, AutoLatentConfig, AutoLatentResult,
    MaeTracePoint, ValidationTracker, DEFAULT_MIN_IMPROVEMENT, DEFAULT_PATIENCE,
};
pub use latent::{latent_from_qb, LatentFactors};
pub use metrics::mae;
pub use predict::{predict_rating, Prediction, Predictor, WEIGHT_EPS};

/// One known rating `A(user, item) = rating`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RatingSample {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
}

impl RatingSample {
    pub fn new(user: usize, item: usize, rating: f64) -> Self {
        RatingSample { user, item, rating }
    }
}
