use rayon::prelude::*;

use super::{LatentFactors, RatingSample};
use crate::error::{Error, Result};
use crate::linalg::SparseRatings;

/// Accumulated similarity weight below which a prediction falls back.
pub const WEIGHT_EPS: f64 = 1e-9;

/// A predicted rating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    /// Final value, clamped to the rating range.
    pub value: f64,
    /// `a / w` before clamping; `None` on the fallback path.
    pub raw: Option<f64>,
    /// True when the weighted average was undefined and the user (or global)
    /// mean was used instead.
    pub fallback: bool,
}

/// Cosine-weighted item-based predictor over a training matrix.
///
/// Caches per-user and global means for the fallback path.
pub struct Predictor<'a> {
    a: &'a SparseRatings,
    user_means: Vec<Option<f64>>,
    global_mean: f64,
}

impl<'a> Predictor<'a> {
    pub fn new(a: &'a SparseRatings) -> Self {
        let user_means = (0..a.rows())
            .map(|i| {
                let (_, vals) = a.row(i);
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect();
        let (lo, hi) = a.rating_range();
        let global_mean = a.mean().unwrap_or(0.5 * (lo + hi));
        Predictor {
            a,
            user_means,
            global_mean,
        }
    }

    pub fn matrix(&self) -> &SparseRatings {
        self.a
    }

    fn clamp(&self, v: f64) -> f64 {
        let (lo, hi) = self.a.rating_range();
        v.clamp(lo, hi)
    }

    fn fallback(&self, i: usize) -> Prediction {
        Prediction {
            value: self.clamp(self.user_means[i].unwrap_or(self.global_mean)),
            raw: None,
            fallback: true,
        }
    }

    pub fn predict(&self, f: &LatentFactors, i: usize, j: usize) -> Result<Prediction> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if i >= m || j >= n {
            return Err(Error::IndexOutOfBounds {
                row: i,
                col: j,
                rows: m,
                cols: n,
            });
        }
        if f.items() != n {
            return Err(Error::InvalidArgument(format!(
                "latent factors cover {} items, matrix has {n}",
                f.items()
            )));
        }
        let norms = f.col_norms();
        let nj = norms[j];
        if nj == 0.0 {
            return Ok(self.fallback(i));
        }
        let tj = f.item(j);
        let (cols, vals) = self.a.row(i);
        let (mut acc, mut weight) = (0.0, 0.0);
        for (&l, &r) in cols.iter().zip(vals) {
            let nl = norms[l];
            if nl == 0.0 {
                continue;
            }
            let dot: f64 = tj.iter().zip(f.item(l)).map(|(x, y)| x * y).sum();
            let gamma = dot / (nj * nl);
            acc += gamma * r;
            weight += gamma;
        }
        if weight.abs() < WEIGHT_EPS {
            return Ok(self.fallback(i));
        }
        let raw = acc / weight;
        Ok(Prediction {
            value: self.clamp(raw),
            raw: Some(raw),
            fallback: false,
        })
    }

    /// Predictions for every sample, in order. Parallel over samples.
    pub fn predict_all(&self, f: &LatentFactors, samples: &[RatingSample]) -> Result<Vec<Prediction>> {
        samples
            .par_iter()
            .map(|s| self.predict(f, s.user, s.item))
            .collect()
    }

    /// MAE of the predictions against the samples' ratings.
    pub fn mae(&self, f: &LatentFactors, samples: &[RatingSample]) -> Result<f64> {
        let preds: Vec<f64> = self.predict_all(f, samples)?.iter().map(|p| p.value).collect();
        let truths: Vec<f64> = samples.iter().map(|s| s.rating).collect();
        super::mae(&preds, &truths)
    }
}

/// Predicts `A(i, j)` as the cosine-similarity weighted average of user
/// `i`'s known ratings, clamped to the rating range.
pub fn predict_rating(a: &SparseRatings, f: &LatentFactors, i: usize, j: usize) -> Result<Prediction> {
    Predictor::new(a).predict(f, i, j)
}
