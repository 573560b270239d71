use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dense::DenseMat;

/// Seeded source of standard normal sketch matrices.
///
/// Every column of every block has its own ChaCha stream keyed by
/// `(seed, block, column)`, and normals are produced from it with the
/// Box–Muller transform. Entries therefore depend only on their coordinates,
/// not on generation order or thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussianStream {
    seed: u64,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `rows × cols` matrix for block `block`.
    pub fn block(&self, block: u32, rows: usize, cols: usize) -> DenseMat {
        let mut out = DenseMat::zeros(rows, cols);
        if rows == 0 {
            return out;
        }
        out.as_mut_slice()
            .par_chunks_mut(rows)
            .enumerate()
            .for_each(|(c, col)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(((block as u64) << 32) | c as u64);
                for pair in col.chunks_mut(2) {
                    let (z0, z1) = box_muller(rng.next_u64(), rng.next_u64());
                    pair[0] = z0;
                    if let Some(second) = pair.get_mut(1) {
                        *second = z1;
                    }
                }
            });
        out
    }
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1] keeps the logarithm finite
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    let radius = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (radius * c, radius * s)
}

/// I.i.d. standard normal `rows × cols` matrix; same seed and shape give the
/// same matrix.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMat {
    GaussianStream::new(seed).block(0, rows, cols)
}
