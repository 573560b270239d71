use nalgebra::{linalg::SymmetricEigen, DMatrix, QR, SVD};
use rayon::prelude::*;

use super::dense::{mismatch, DenseMat};
use super::sparse::SparseRatings;
use crate::error::{Error, Result};

/// Relative threshold on Householder diagonal factors below which a matrix is
/// treated as column-rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Relative floor (against `‖M‖²_F`) on Gram eigenvalues in [`eig_svd`].
pub const EIG_FLOOR: f64 = 1e-14;

/// Truncated SVD `A ≈ U·diag(S)·Vᵀ` with `S` descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdTriplet {
    pub u: DenseMat,
    pub s: Vec<f64>,
    pub v: DenseMat,
}

impl SvdTriplet {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Dense `U·diag(S)·Vᵀ`.
    pub fn reconstruct(&self) -> DenseMat {
        let mut us = self.u.clone();
        us.scale_columns(&self.s);
        us.matmul_tr(&self.v).expect("factor shapes agree")
    }

    /// `‖A − U·diag(S)·Vᵀ‖_F`, computed explicitly.
    pub fn residual_fro(&self, a: &SparseRatings) -> Result<f64> {
        let mut us = self.u.clone();
        us.scale_columns(&self.s);
        Ok(low_rank_residual_sq(a, &us, &self.v)?.sqrt())
    }

    /// Exchanges the roles of `U` and `V` (the SVD of the transpose).
    pub fn transposed(self) -> SvdTriplet {
        SvdTriplet {
            u: self.v,
            s: self.s,
            v: self.u,
        }
    }
}

/// Economic SVD from [`eig_svd`]: `M = U·diag(S)·Vᵀ` with `S` ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigSvd {
    pub u: DenseMat,
    pub s: Vec<f64>,
    pub v: DenseMat,
}

/// `‖A − L·Rᵀ‖²_F` for sparse `A` (m×n), `L` (m×k), `R` (n×k).
///
/// Rows of `A` are densified in fixed-size chunks, so memory stays at
/// `O(chunk·n)` and the sum order is independent of the thread count.
pub fn low_rank_residual_sq(a: &SparseRatings, left: &DenseMat, right: &DenseMat) -> Result<f64> {
    if left.rows() != a.rows() || right.rows() != a.cols() || left.cols() != right.cols() {
        return Err(mismatch("low_rank_residual", left.shape(), right.shape()));
    }
    const CHUNK: usize = 64;
    let rt = right.as_matrix().transpose();
    let partial: Vec<f64> = (0..a.rows().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(a.rows() - start);
            let block = left.as_matrix().rows(start, len);
            let mut dense: DMatrix<f64> = -(block * &rt);
            for i in start..start + len {
                let (cols, vals) = a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    dense[(i - start, j)] += v;
                }
            }
            dense.iter().map(|v| v * v).sum()
        })
        .collect();
    Ok(partial.iter().sum())
}

fn householder(m: &DenseMat) -> (DenseMat, Vec<f64>) {
    let qr = QR::new(m.as_matrix().clone());
    let r = qr.r();
    let diag = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)]).collect();
    (DenseMat::from(qr.q()), diag)
}

/// Orthonormal basis of `range(M)` via economic Householder QR.
///
/// Fails with [`Error::RankDeficient`] if some diagonal factor of `R` falls
/// below `1e-12·‖M‖_F`.
pub fn orthonormal_basis(m: &DenseMat) -> Result<DenseMat> {
    if m.rows() < m.cols() {
        return Err(Error::InvalidArgument(format!(
            "orthonormal_basis needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let threshold = RANK_TOL * m.fro_norm();
    let (q, diag) = householder(m);
    if let Some((column, value)) = diag
        .iter()
        .map(|d| d.abs())
        .enumerate()
        .find(|&(_, d)| !(d > threshold))
    {
        return Err(Error::RankDeficient {
            column,
            value,
            threshold,
        });
    }
    Ok(q)
}

/// Householder `Q` without the rank check.
///
/// The columns are orthonormal regardless of the rank of `M`; directions
/// beyond the numerical rank are arbitrary. The blocked QB loops rely on this
/// so that exactly low-rank inputs produce zero rows in `B` instead of an
/// error.
pub(crate) fn orthonormalize(m: &DenseMat) -> DenseMat {
    householder(m).0
}

/// Permuted unit-lower-trapezoidal factor `L` of a partial-pivoted LU of `M`,
/// so that `M = L·U` with `U` upper triangular. Its columns span `range(M)`
/// when `M` has full column rank.
pub fn lu_lower_basis(m: &DenseMat) -> Result<DenseMat> {
    lu_factor(m, true)
}

pub(crate) fn lu_lower_basis_unchecked(m: &DenseMat) -> DenseMat {
    lu_factor(m, false).expect("unchecked LU does not fail")
}

fn lu_factor(m: &DenseMat, strict: bool) -> Result<DenseMat> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::InvalidArgument(format!(
            "lu_lower_basis needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let mut work = m.clone();
    let mut pivot_used = vec![false; rows];
    for k in 0..cols {
        let col = work.column(k);
        let mut pivot = None;
        let mut best = 0.0;
        for (i, &v) in col.iter().enumerate() {
            if !pivot_used[i] && (pivot.is_none() || v.abs() > best) {
                pivot = Some(i);
                best = v.abs();
            }
        }
        let p = pivot.expect("rows >= cols leaves an unused pivot row");
        pivot_used[p] = true;
        let pv = work.get(p, k);
        if pv == 0.0 {
            if strict {
                return Err(Error::RankDeficient {
                    column: k,
                    value: 0.0,
                    threshold: 0.0,
                });
            }
            // zero column below: the factor column is the unit vector e_p
            let c = work.column_mut(k);
            c.iter_mut().for_each(|v| *v = 0.0);
            c[p] = 1.0;
            continue;
        }
        let lcol: Vec<f64> = work
            .column(k)
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i == p {
                    1.0
                } else if pivot_used[i] {
                    0.0
                } else {
                    v / pv
                }
            })
            .collect();
        for j in k + 1..cols {
            let factor = work.get(p, j);
            if factor != 0.0 {
                let cj = work.column_mut(j);
                for (i, l) in lcol.iter().enumerate() {
                    if i != p && *l != 0.0 {
                        cj[i] -= l * factor;
                    }
                }
                cj[p] = 0.0;
            }
        }
        work.column_mut(k).copy_from_slice(&lcol);
    }
    Ok(work)
}

struct GramEigen {
    /// Ascending eigenvalues of `MᵀM`.
    values: Vec<f64>,
    /// Matching eigenvectors as columns.
    vectors: DenseMat,
    floor: f64,
}

fn gram_eigen(m: &DenseMat) -> Result<GramEigen> {
    if m.rows() < m.cols() {
        return Err(Error::InvalidArgument(format!(
            "eig_svd needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gram = m.as_matrix().tr_mul(m.as_matrix());
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DenseMat::from(eig.eigenvectors).select_columns(&order);
    Ok(GramEigen {
        values,
        vectors,
        floor: EIG_FLOOR * m.fro_norm_sq(),
    })
}

/// Economic SVD through the eigendecomposition of the Gram matrix `MᵀM`.
///
/// Singular values come back in ascending order. Squaring halves the
/// attainable precision, so `U` is orthonormal only to about `1e-8`.
/// Fails with [`Error::NearSingular`] when an eigenvalue is below
/// `1e-14·‖M‖²_F`, since `U = M·V·S⁻¹` would divide by it.
pub fn eig_svd(m: &DenseMat) -> Result<EigSvd> {
    let eig = gram_eigen(m)?;
    if let Some((index, &eigenvalue)) = eig.values.iter().enumerate().find(|(_, &v)| !(v >= eig.floor)) {
        return Err(Error::NearSingular {
            index,
            eigenvalue,
            floor: eig.floor,
        });
    }
    Ok(finish_eig_svd(m, eig.values, eig.vectors))
}

/// [`eig_svd`] restricted to the components whose eigenvalue clears the
/// floor; the rest (the leading entries of the ascending order) are dropped.
pub(crate) fn eig_svd_nonsingular(m: &DenseMat) -> Result<EigSvd> {
    let eig = gram_eigen(m)?;
    let first = eig.values.iter().position(|&v| v >= eig.floor).unwrap_or(eig.values.len());
    let keep: Vec<usize> = (first..eig.values.len()).collect();
    Ok(finish_eig_svd(
        m,
        eig.values[first..].to_vec(),
        eig.vectors.select_columns(&keep),
    ))
}

fn finish_eig_svd(m: &DenseMat, values: Vec<f64>, v: DenseMat) -> EigSvd {
    let s: Vec<f64> = values.iter().map(|&l| l.sqrt()).collect();
    let mut u = m.matmul(&v).expect("Gram eigenvectors match M's columns");
    let inv: Vec<f64> = s.iter().map(|&x| 1.0 / x).collect();
    u.scale_columns(&inv);
    EigSvd { u, s, v }
}

/// Thin SVD with descending singular values, via one-sided bidiagonalization.
pub fn dense_svd(m: &DenseMat) -> SvdTriplet {
    let svd = SVD::new(m.as_matrix().clone(), true, true);
    let u = DenseMat::from(svd.u.expect("requested U"));
    let v = DenseMat::from(svd.v_t.expect("requested Vᵀ").transpose());
    let s = svd.singular_values.iter().copied().collect();
    SvdTriplet { u, s, v }
}
