use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{latent_from_qb, LatentFactors, Predictor, RatingSample};
use crate::error::{Error, Result};
use crate::linalg::SparseRatings;
use crate::rsvd::{AdaptiveQb, QbState, DEFAULT_BLOCK, DEFAULT_PASSES};

pub const DEFAULT_PATIENCE: usize = 2;
pub const DEFAULT_MIN_IMPROVEMENT: f64 = 1e-4;

/// One point of the MAE-vs-k curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaeTracePoint {
    pub k: usize,
    pub validation_mae: f64,
    /// MAE on an extra monitored set (e.g. the test split), if one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor_mae: Option<f64>,
    /// Wall-clock seconds since the run started.
    pub seconds: f64,
}

/// Tracks validation MAE across blocks and decides when to stop.
///
/// A block counts as progress when it lowers the best MAE by at least
/// `min_improvement`; `patience` consecutive blocks without progress stop the
/// loop. The factors of the best block (lowest MAE seen) are kept.
pub struct ValidationTracker<'a> {
    predictor: Predictor<'a>,
    validation: &'a [RatingSample],
    monitor: Option<&'a [RatingSample]>,
    patience: usize,
    min_improvement: f64,
    best: Option<(f64, usize, LatentFactors)>,
    stale: usize,
    trace: Vec<MaeTracePoint>,
    started: Instant,
}

impl<'a> ValidationTracker<'a> {
    pub fn new(
        a: &'a SparseRatings,
        validation: &'a [RatingSample],
        patience: usize,
        min_improvement: f64,
    ) -> Result<Self> {
        if validation.is_empty() {
            return Err(Error::InvalidArgument("validation set is empty".into()));
        }
        if patience == 0 {
            return Err(Error::InvalidArgument("patience must be >= 1".into()));
        }
        Ok(ValidationTracker {
            predictor: Predictor::new(a),
            validation,
            monitor: None,
            patience,
            min_improvement,
            best: None,
            stale: 0,
            trace: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn with_monitor(mut self, monitor: &'a [RatingSample]) -> Self {
        self.monitor = Some(monitor);
        self
    }

    /// Evaluates the block just added to `state`. Returns the rank of the
    /// best block once the stopping rule fires.
    pub fn observe(&mut self, state: &QbState) -> Result<Option<usize>> {
        let factors = latent_from_qb(state)?;
        let mae = self.predictor.mae(&factors, self.validation)?;
        let monitor_mae = self
            .monitor
            .map(|m| self.predictor.mae(&factors, m))
            .transpose()?;
        let k = factors.k();
        self.trace.push(MaeTracePoint {
            k,
            validation_mae: mae,
            monitor_mae,
            seconds: self.started.elapsed().as_secs_f64(),
        });
        let previous = self.best.as_ref().map(|b| b.0);
        let progressed = previous.is_none_or(|best| best - mae >= self.min_improvement);
        if previous.is_none_or(|best| mae < best) {
            self.best = Some((mae, k, factors));
        }
        if progressed {
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        Ok((self.stale >= self.patience).then(|| self.best_rank().expect("best is set")))
    }

    pub fn best_rank(&self) -> Option<usize> {
        self.best.as_ref().map(|b| b.1)
    }

    pub fn best_mae(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn trace(&self) -> &[MaeTracePoint] {
        &self.trace
    }

    pub fn into_parts(self) -> (Option<(f64, usize, LatentFactors)>, Vec<MaeTracePoint>) {
        (self.best, self.trace)
    }
}

/// Parameters of [`auto_latent_factors`].
#[derive(Clone, Debug, PartialEq)]
pub struct AutoLatentConfig {
    pub block_size: usize,
    pub passes: usize,
    pub patience: usize,
    pub min_improvement: f64,
    pub seed: u64,
}

impl Default for AutoLatentConfig {
    fn default() -> Self {
        AutoLatentConfig {
            block_size: DEFAULT_BLOCK,
            passes: DEFAULT_PASSES,
            patience: DEFAULT_PATIENCE,
            min_improvement: DEFAULT_MIN_IMPROVEMENT,
            seed: 0,
        }
    }
}

/// Result of [`auto_latent_factors`].
#[derive(Clone, Debug)]
pub struct AutoLatentResult {
    /// Factors of the block with the lowest validation MAE.
    pub factors: LatentFactors,
    pub validation_mae: f64,
    /// MAE after every evaluated block, in order of increasing k.
    pub trace: Vec<MaeTracePoint>,
    /// Sparse passes over the training matrix.
    pub passes: usize,
}

impl AutoLatentResult {
    pub fn k(&self) -> usize {
        self.factors.k()
    }
}

/// Grows the adaptive PCA of `a` block by block, evaluating the validation
/// MAE of the cosine-similarity predictor after each block, and returns the
/// latent factors at the validation minimum.
pub fn auto_latent_factors(
    a: &SparseRatings,
    validation: &[RatingSample],
    config: &AutoLatentConfig,
) -> Result<AutoLatentResult> {
    run(a, validation, None, config)
}

/// [`auto_latent_factors`] that also records the MAE on `monitor` (typically
/// the test split) at every block. The monitored set does not influence the
/// stopping decision.
pub fn auto_latent_factors_monitored(
    a: &SparseRatings,
    validation: &[RatingSample],
    monitor: &[RatingSample],
    config: &AutoLatentConfig,
) -> Result<AutoLatentResult> {
    run(a, validation, Some(monitor), config)
}

fn run(
    a: &SparseRatings,
    validation: &[RatingSample],
    monitor: Option<&[RatingSample]>,
    config: &AutoLatentConfig,
) -> Result<AutoLatentResult> {
    if config.passes < 3 {
        return Err(Error::InvalidArgument(format!(
            "pass count must be > 2, got {}",
            config.passes
        )));
    }
    let mut tracker = ValidationTracker::new(a, validation, config.patience, config.min_improvement)?;
    if let Some(m) = monitor {
        tracker = tracker.with_monitor(m);
    }
    let mut engine = AdaptiveQb::new(a, config.block_size, config.passes, config.seed)?;
    loop {
        if !engine.can_step() {
            if tracker.best_rank().is_some() {
                break;
            }
            return Err(Error::Exhausted {
                rank: engine.state().rank(),
                cap: engine.rank_cap(),
                state: Box::new(engine.into_state()),
            });
        }
        let state = engine.step()?;
        if tracker.observe(state)?.is_some() {
            break;
        }
    }
    let passes = engine.state().passes();
    let (best, trace) = tracker.into_parts();
    let (validation_mae, _, factors) = best.expect("at least one block was evaluated");
    Ok(AutoLatentResult {
        factors,
        validation_mae,
        trace,
        passes,
    })
}
