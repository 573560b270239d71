#![allow(dead_code)]

use adaptive_cf::{DenseMat, SparseRatings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    // Box–Muller, independent of the library's sketch generator
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_dense(rows: usize, cols: usize, seed: u64) -> DenseMat {
    let mut r = rng(seed);
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        values.push(normal(&mut r));
    }
    DenseMat::from_column_major(rows, cols, values).unwrap()
}

/// Sparse matrix with half-star ratings in [0.5, 5] at the given density.
pub fn random_ratings(m: usize, n: usize, density: f64, seed: u64) -> SparseRatings {
    let mut r = rng(seed);
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if r.random::<f64>() < density {
                let stars = r.random_range(1..=10) as f64 * 0.5;
                triplets.push((i, j, stars));
            }
        }
    }
    SparseRatings::from_triplets(m, n, &triplets, (0.5, 5.0)).unwrap()
}

/// Dense exact rank-`r` product of Gaussian factors, stored sparse.
pub fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> SparseRatings {
    let left = random_dense(m, r, seed);
    let right = random_dense(r, n, seed + 1);
    SparseRatings::from_dense(&left.matmul(&right).unwrap()).unwrap()
}

/// Gram–Schmidt orthonormal basis, written independently of the library QR.
pub fn gram_schmidt(m: &DenseMat) -> DenseMat {
    let (rows, cols) = m.shape();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = m.column(j).to_vec();
        for _ in 0..2 {
            for b in &q {
                let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    DenseMat::from_column_major(rows, cols, q.concat()).unwrap()
}

/// Dense `Q·Qᵀ`.
pub fn projector(q: &DenseMat) -> DenseMat {
    q.matmul_tr(q).unwrap()
}

pub fn fro_diff(a: &DenseMat, b: &DenseMat) -> f64 {
    a.sub(b).unwrap().fro_norm()
}

/// Matrix with singular values `ratio^i` and random singular vectors.
pub fn geometric_spectrum(m: usize, n: usize, ratio: f64, seed: u64) -> (SparseRatings, Vec<f64>) {
    let r = m.min(n);
    let u = gram_schmidt(&random_dense(m, r, seed));
    let v = gram_schmidt(&random_dense(n, r, seed + 7));
    let s: Vec<f64> = (0..r).map(|i| ratio.powi(i as i32)).collect();
    let mut us = u.clone();
    us.scale_columns(&s);
    let a = us.matmul_tr(&v).unwrap();
    (SparseRatings::from_dense(&a).unwrap(), s)
}

/// Ratings from an exact rank-`r` model: items fall into `r` clusters and
/// each user gives every item of a cluster the same level from
/// {-2, -1, 1, 2}. Cells are observed with probability `density` and split
/// into train/validation/test in the ratio 8:1:1.
pub fn rank_model_ratings(
    m: usize,
    n: usize,
    r: usize,
    density: f64,
    seed: u64,
) -> (SparseRatings, Vec<adaptive_cf::cf::RatingSample>, Vec<adaptive_cf::cf::RatingSample>) {
    use adaptive_cf::cf::RatingSample;
    const LEVELS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
    let mut g = rng(seed);
    let levels: Vec<f64> = (0..m * r).map(|_| LEVELS[g.random_range(0..4)]).collect();
    let value = |i: usize, j: usize| levels[i * r + j % r];
    let (mut train, mut validation, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..m {
        for j in 0..n {
            if g.random::<f64>() >= density {
                continue;
            }
            match g.random_range(0..10) {
                0 => validation.push(RatingSample::new(i, j, value(i, j))),
                1 => test.push(RatingSample::new(i, j, value(i, j))),
                _ => train.push((i, j, value(i, j))),
            }
        }
    }
    let a = SparseRatings::from_triplets(m, n, &train, (-2.0, 2.0)).unwrap();
    (a, validation, test)
}

/// Item-based cosine prediction written as a plain loop over a dense
/// `Option` grid. Returns the unclamped weighted average, or `None` when the
/// accumulated weight vanishes.
pub fn brute_force_prediction(known: &[Vec<Option<f64>>], t: &[Vec<f64>], i: usize, j: usize) -> Option<f64> {
    let k = t.len();
    let col = |l: usize| -> Vec<f64> { (0..k).map(|r| t[r][l]).collect() };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tj = col(j);
    if norm(&tj) == 0.0 {
        return None;
    }
    let (mut acc, mut w) = (0.0, 0.0);
    for (l, cell) in known[i].iter().enumerate() {
        let Some(r) = cell else { continue };
        let tl = col(l);
        if norm(&tl) == 0.0 {
            continue;
        }
        let gamma = tj.iter().zip(&tl).map(|(x, y)| x * y).sum::<f64>() / (norm(&tj) * norm(&tl));
        acc += gamma * r;
        w += gamma;
    }
    (w.abs() >= 1e-9).then(|| acc / w)
}

pub fn grid(a: &SparseRatings) -> Vec<Vec<Option<f64>>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.get(i, j)).collect())
        .collect()
}
