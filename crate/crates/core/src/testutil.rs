//! Seeded random inputs for unit tests.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;

pub(crate) struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn positive_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| 0.1 + self.uniform()).collect()
    }

    /// Euclidean distance matrix of `n` random points in the unit square.
    pub fn distance_matrix(&mut self, n: usize) -> Matrix {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (self.uniform(), self.uniform())).collect();
        Matrix::from_fn(n, n, |i, j| {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            libm::sqrt(dx * dx + dy * dy)
        })
    }
}
