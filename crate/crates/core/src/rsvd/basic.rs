use crate::error::{Error, Result};
use crate::linalg::{dense_svd, orthonormalize, sparse_dense_mul, GaussianStream, SparseRatings, SvdTriplet, RANK_TOL};

/// Basic randomized SVD with `power` rounds of power iteration and
/// `oversample` extra sketch columns, truncated to rank `k`.
///
/// The sketch may exceed the rank of `A`; only a requested singular value
/// below `1e-12·σ₁` is an error ([`Error::RankDeficient`]).
pub fn basic_rsvd(
    a: &SparseRatings,
    k: usize,
    power: usize,
    oversample: usize,
    seed: u64,
) -> Result<SvdTriplet> {
    let width = k + oversample;
    if k == 0 || width > a.rows().min(a.cols()) {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k and k + s <= min(m, n); got k={k}, s={oversample} for {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let omega = GaussianStream::new(seed).block(0, a.cols(), width);
    let mut q = orthonormalize(&sparse_dense_mul(a, &omega, false)?);
    for _ in 0..power {
        let g = orthonormalize(&sparse_dense_mul(a, &q, true)?);
        q = orthonormalize(&sparse_dense_mul(a, &g, false)?);
    }
    // Bᵀ = AᵀQ; svd(Bᵀ) = W·S·Zᵀ gives B = Z·S·Wᵀ
    let bt = sparse_dense_mul(a, &q, true)?;
    let svd = dense_svd(&bt);
    let threshold = RANK_TOL * svd.s[0];
    if let Some(column) = svd.s[..k].iter().position(|&x| !(x > threshold)) {
        return Err(Error::RankDeficient {
            column,
            value: svd.s[column],
            threshold,
        });
    }
    let u = q.matmul(&svd.v.columns(0..k))?;
    Ok(SvdTriplet {
        u,
        s: svd.s[..k].to_vec(),
        v: svd.u.columns(0..k),
    })
}
