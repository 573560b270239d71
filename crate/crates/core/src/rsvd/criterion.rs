use std::fmt;

use super::state::QbState;
use crate::cf::{RatingSample, ValidationTracker};
use crate::error::{Error, Result};
use crate::linalg::SparseRatings;

/// When the adaptive PCA loop stops growing its basis.
pub enum TerminationCriterion<'a> {
    /// Stop once the basis holds at least `k` vectors and return the top `k`
    /// singular triplets.
    FixedRank(usize),
    /// Stop once `‖A − QB‖_F < ε‖A‖_F`, then shrink the final block to the
    /// smallest rank still meeting the tolerance.
    FrobTolerance(f64),
    /// Grow while the collaborative-filtering MAE on `validation` keeps
    /// improving; stop after `patience` blocks without an improvement of at
    /// least `min_improvement` and keep the best block.
    ValidationMae {
        validation: &'a [RatingSample],
        patience: usize,
        min_improvement: f64,
    },
    /// User callback, invoked once per block; returning `true` stops the loop
    /// with the current rank.
    Callback(Box<dyn FnMut(&QbState) -> Result<bool> + 'a>),
}

impl fmt::Debug for TerminationCriterion<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FixedRank(k) => f.debug_tuple("FixedRank").field(k).finish(),
            Self::FrobTolerance(e) => f.debug_tuple("FrobTolerance").field(e).finish(),
            Self::ValidationMae {
                validation,
                patience,
                min_improvement,
            } => f
                .debug_struct("ValidationMae")
                .field("samples", &validation.len())
                .field("patience", patience)
                .field("min_improvement", min_improvement)
                .finish(),
            Self::Callback(_) => f.write_str("Callback(..)"),
        }
    }
}

impl TerminationCriterion<'_> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::FixedRank(k) if *k == 0 => Err(Error::InvalidArgument("FixedRank needs k >= 1".into())),
            Self::FrobTolerance(e) if !(*e > 0.0 && *e < 1.0) => Err(Error::InvalidArgument(format!(
                "FrobTolerance needs 0 < eps < 1, got {e}"
            ))),
            Self::ValidationMae { patience, .. } if *patience == 0 => {
                Err(Error::InvalidArgument("ValidationMae needs patience >= 1".into()))
            }
            Self::ValidationMae { validation, .. } if validation.is_empty() => {
                Err(Error::InvalidArgument("ValidationMae needs a nonempty validation set".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of checking the criterion after a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Decision {
    Continue,
    /// Keep the first `keep` rows of `B` and return the top `rank` triplets.
    Stop { keep: usize, rank: usize },
}

/// Per-run mutable state of a criterion.
pub(crate) enum CriterionState<'a> {
    FixedRank(usize),
    FrobTolerance(f64),
    Validation(ValidationTracker<'a>),
    Callback(Box<dyn FnMut(&QbState) -> Result<bool> + 'a>),
}

impl<'a> CriterionState<'a> {
    pub fn new(criterion: TerminationCriterion<'a>, a: &'a SparseRatings) -> Result<Self> {
        criterion.validate()?;
        Ok(match criterion {
            TerminationCriterion::FixedRank(k) => Self::FixedRank(k),
            TerminationCriterion::FrobTolerance(e) => Self::FrobTolerance(e),
            TerminationCriterion::ValidationMae {
                validation,
                patience,
                min_improvement,
            } => Self::Validation(ValidationTracker::new(a, validation, patience, min_improvement)?),
            TerminationCriterion::Callback(cb) => Self::Callback(cb),
        })
    }

    pub fn check(&mut self, state: &mut QbState) -> Result<Decision> {
        let rank = state.rank();
        match self {
            Self::FixedRank(k) => Ok(if rank >= *k {
                Decision::Stop { keep: rank, rank: *k }
            } else {
                Decision::Continue
            }),
            Self::FrobTolerance(eps) => {
                if state.error_estimate() < eps.powi(2) * state.a_norm_sq() {
                    let k = super::qb::refine_final_block(state, *eps)?;
                    Ok(Decision::Stop { keep: k, rank: k })
                } else {
                    Ok(Decision::Continue)
                }
            }
            Self::Validation(tracker) => Ok(match tracker.observe(state)? {
                Some(best) => Decision::Stop { keep: best, rank: best },
                None => Decision::Continue,
            }),
            Self::Callback(cb) => Ok(if cb(state)? {
                Decision::Stop { keep: rank, rank }
            } else {
                Decision::Continue
            }),
        }
    }

    /// Best stopping point available when the rank cap is reached first.
    pub fn on_exhaustion(&self) -> Option<usize> {
        match self {
            Self::Validation(tracker) => tracker.best_rank(),
            _ => None,
        }
    }
}
