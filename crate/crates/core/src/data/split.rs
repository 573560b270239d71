use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::to_sparse;
use super::RatingsDataset;
use crate::cf::RatingSample;
use crate::error::{Error, Result};
use crate::linalg::SparseRatings;

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train,
            validation,
            test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses `"0.9,0.05,0.05"`.
    pub fn parse(fractions: &str, seed: u64) -> Result<Self> {
        let parts: Vec<f64> = fractions
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad split {fractions:?}: {e}")))?;
        match parts[..] {
            [a, b, c] => Self::new(a, b, c, seed),
            _ => Err(Error::InvalidArgument(format!(
                "split needs three fractions, got {fractions:?}"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = [self.train, self.validation, self.test];
        if f.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument(format!("split fractions must be positive: {f:?}")));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.9,
            validation: 0.05,
            test: 0.05,
            seed: 0,
        }
    }
}

/// Disjoint partition of a dataset's ratings.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    /// Training ratings over the full `users × items` index space, so held-out
    /// users or items without training ratings stay addressable.
    pub train: SparseRatings,
    pub validation: Vec<RatingSample>,
    pub test: Vec<RatingSample>,
}

/// Shuffles all ratings with the spec's seed and cuts them into
/// `round(N·train)`, `round(N·validation)` and the remainder.
pub fn split(ds: &RatingsDataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset("cannot split an empty dataset".into()));
    }
    let total = ds.len();
    let n_train = (total as f64 * spec.train).round() as usize;
    let n_val = (total as f64 * spec.validation).round() as usize;
    let n_test = total.saturating_sub(n_train + n_val);
    if n_train == 0 || n_val == 0 || n_test == 0 || n_train + n_val > total {
        return Err(Error::InvalidArgument(format!(
            "split of {total} ratings gives an empty part ({n_train}/{n_val}/{n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let pick = |idx: &[usize]| -> Vec<RatingSample> { idx.iter().map(|&i| ds.samples()[i]).collect() };
    let train = pick(&order[..n_train]);
    let validation = pick(&order[n_train..n_train + n_val]);
    let test = pick(&order[n_train + n_val..]);
    Ok(Split {
        train: to_sparse(ds.users(), ds.items(), &train, ds.rating_range())?,
        validation,
        test,
    })
}

/// Text record of a split for reproducibility audits.
pub fn split_manifest(spec: &SplitSpec, split: &Split) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed = {}", spec.seed);
    let _ = writeln!(s, "fractions = {},{},{}", spec.train, spec.validation, spec.test);
    let _ = writeln!(s, "train = {}", split.train.nnz());
    let _ = writeln!(s, "validation = {}", split.validation.len());
    let _ = writeln!(s, "test = {}", split.test.len());
    s
}

pub fn write_split_manifest(path: impl AsRef<Path>, spec: &SplitSpec, split: &Split) -> Result<()> {
    std::fs::write(path, split_manifest(spec, split))?;
    Ok(())
}
