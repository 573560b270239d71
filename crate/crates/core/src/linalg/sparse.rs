use rayon::prelude::*;

use super::dense::{mismatch, DenseMat};
use crate::error::{Error, Result};

/// Known user→item ratings stored in compressed sparse row form.
///
/// Missing entries are unknown ratings and behave as zeros in every
/// product. All stored values lie inside `[rating_min, rating_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRatings {
    m: usize,
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    rating_min: f64,
    rating_max: f64,
}

impl SparseRatings {
    /// Assembles the matrix from `(row, col, value)` triplets in any order.
    ///
    /// Duplicate coordinates are rejected; callers decide their own
    /// deduplication rule before building.
    pub fn from_triplets(
        m: usize,
        n: usize,
        triplets: &[(usize, usize, f64)],
        rating_range: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = rating_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "invalid rating range [{lo}, {hi}]"
            )));
        }
        let mut counts = vec![0usize; m + 1];
        for &(i, j, v) in triplets {
            if i >= m || j >= n {
                return Err(Error::IndexOutOfBounds {
                    row: i,
                    col: j,
                    rows: m,
                    cols: n,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v < lo || v > hi {
                return Err(Error::InvalidSparse(format!(
                    "value {v} at ({i}, {j}) outside rating range [{lo}, {hi}]"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..m {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut cursor = counts;
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[cursor[i]] = (j, v);
            cursor[i] += 1;
        }
        for i in 0..m {
            let row = &mut entries[row_offsets[i]..row_offsets[i + 1]];
            row.sort_unstable_by_key(|e| e.0);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidSparse(format!(
                    "duplicate entry at ({i}, {})",
                    w[0].0
                )));
            }
        }
        let (col_indices, values) = entries.into_iter().unzip();
        Ok(SparseRatings {
            m,
            n,
            row_offsets,
            col_indices,
            values,
            rating_min: lo,
            rating_max: hi,
        })
    }

    /// Like [`from_triplets`](Self::from_triplets) with the rating range set
    /// to the observed min/max (or `[0, 0]` when there are no entries).
    pub fn from_triplets_observed(
        m: usize,
        n: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let range = observed_range(triplets.iter().map(|t| t.2));
        Self::from_triplets(m, n, triplets, range)
    }

    /// Sparse copy of a dense matrix keeping only nonzero entries.
    pub fn from_dense(a: &DenseMat) -> Result<Self> {
        let mut triplets = Vec::new();
        for j in 0..a.cols() {
            for (i, &v) in a.column(j).iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets_observed(a.rows(), a.cols(), &triplets)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn rating_range(&self) -> (f64, f64) {
        (self.rating_min, self.rating_max)
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Stored value at `(i, j)`, if known.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.m).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = DenseMat::zeros(self.m, self.n);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }

    pub fn transpose(&self) -> SparseRatings {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        SparseRatings::from_triplets(self.n, self.m, &triplets, self.rating_range())
            .expect("transpose of a valid matrix is valid")
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Mean of the stored ratings, `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        (self.nnz() > 0).then(|| self.values.iter().sum::<f64>() / self.nnz() as f64)
    }

    /// Degree (number of stored entries) of every column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for &j in &self.col_indices {
            counts[j] += 1;
        }
        counts
    }
}

pub(crate) fn observed_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// `A·X` or, with `transpose_a`, `Aᵀ·X`, treating missing ratings as zero.
///
/// Output columns are computed independently, each in a fixed order, so the
/// result is bitwise identical for any thread count.
pub fn sparse_dense_mul(a: &SparseRatings, x: &DenseMat, transpose_a: bool) -> Result<DenseMat> {
    let (inner, out_rows) = if transpose_a { (a.m, a.n) } else { (a.n, a.m) };
    if x.rows() != inner {
        let left = if transpose_a { (a.n, a.m) } else { (a.m, a.n) };
        return Err(mismatch("sparse_dense_mul", left, x.shape()));
    }
    let mut out = DenseMat::zeros(out_rows, x.cols());
    if out_rows == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(out_rows)
        .enumerate()
        .for_each(|(c, dst)| {
            let src = x.column(c);
            if transpose_a {
                for i in 0..a.m {
                    let xi = src[i];
                    if xi == 0.0 {
                        continue;
                    }
                    let (cols, vals) = a.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        dst[j] += v * xi;
                    }
                }
            } else {
                for (i, d) in dst.iter_mut().enumerate() {
                    let (cols, vals) = a.row(i);
                    *d = cols.iter().zip(vals).map(|(&j, &v)| v * src[j]).sum();
                }
            }
        });
    Ok(out)
}
