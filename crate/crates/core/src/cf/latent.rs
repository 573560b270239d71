use crate::error::{Error, Result};
use crate::linalg::{eig_svd_nonsingular, DenseMat, EIG_FLOOR};
use crate::rsvd::QbState;

/// Item latent factors `T = Σ^½Vᵀ` (k × n) with cached column norms.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentFactors {
    t: DenseMat,
    col_norms: Vec<f64>,
}

impl LatentFactors {
    pub fn new(t: DenseMat) -> Result<Self> {
        if t.rows() == 0 {
            return Err(Error::InvalidArgument("latent dimension must be >= 1".into()));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        let col_norms = (0..t.cols())
            .map(|j| t.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Ok(LatentFactors { t, col_norms })
    }

    /// Latent dimension (rows of `T`).
    pub fn k(&self) -> usize {
        self.t.rows()
    }

    /// Number of items (columns of `T`).
    pub fn items(&self) -> usize {
        self.t.cols()
    }

    pub fn t(&self) -> &DenseMat {
        &self.t
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    /// Latent vector of item `j`.
    pub fn item(&self, j: usize) -> &[f64] {
        self.t.column(j)
    }

    /// Leading `k` latent rows.
    pub fn truncated(&self, k: usize) -> Result<LatentFactors> {
        let k = k.min(self.k());
        let tt = self.t.transpose().columns(0..k);
        LatentFactors::new(tt.transpose())
    }
}

/// Item latent factors from a QB state via the eigendecomposition-based SVD
/// of `Bᵀ`, rows ordered by descending singular value.
///
/// Components whose Gram eigenvalue is below the `eig_svd` floor carry no
/// energy and become zero rows, so `k` stays equal to the state's rank.
pub fn latent_from_qb(state: &QbState) -> Result<LatentFactors> {
    let k = state.rank();
    if k == 0 {
        return Err(Error::InvalidArgument("QB state has no completed block".into()));
    }
    let eig = eig_svd_nonsingular(state.bt())?;
    let kept = eig.s.len();
    if kept == 0 {
        return Err(Error::NearSingular {
            index: 0,
            eigenvalue: 0.0,
            floor: EIG_FLOOR * state.bt().fro_norm_sq(),
        });
    }
    // descending order of the ascending eig_svd output
    let ind: Vec<usize> = (0..kept).rev().collect();
    let items = if state.is_transposed() {
        // Aᵀ ≈ Q·B and B = V̂·Ŝ·Ûᵀ, so the item singular vectors are Q·V̂
        state.q().matmul(&eig.v.select_columns(&ind))?
    } else {
        eig.u.select_columns(&ind)
    };
    let n = items.rows();
    let mut t = DenseMat::zeros(k, n);
    for (r, &i) in ind.iter().enumerate() {
        let scale = eig.s[i].sqrt();
        for (j, &v) in items.column(r).iter().enumerate() {
            t.set(r, j, scale * v);
        }
    }
    LatentFactors::new(t)
}
