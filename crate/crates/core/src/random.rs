//! Seeded generators of band-limited test fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, TorusGrid};

/// Deterministic source of random band-limited fields.
///
/// Each generated field is a trigonometric polynomial with coefficients
/// decaying like `1/k`, so its bandwidth is independent of the grid and the
/// same seed yields the same function on every resolution.
pub struct RandomFields {
    rng: ChaCha8Rng,
}

impl RandomFields {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Trigonometric coefficients `(a_k, b_k)` for `k = 0..=kmax`.
    fn coefficients(&mut self, kmax: usize, amp: f64) -> Vec<(f64, f64)> {
        (0..=kmax)
            .map(|k| {
                let decay = amp / (1.0 + k as f64);
                (
                    decay * self.rng.random_range(-1.0..1.0),
                    decay * self.rng.random_range(-1.0..1.0),
                )
            })
            .collect()
    }

    /// Random trigonometric polynomial of degree `kmax`.
    pub fn band_limited(&mut self, grid: TorusGrid, kmax: usize, amp: f64) -> Field {
        let kmax = kmax.min(grid.n() / 2 - 1);
        let c = self.coefficients(kmax, amp);
        let values = (0..grid.n())
            .map(|j| {
                let x = grid.x(j);
                c.iter()
                    .enumerate()
                    .map(|(k, &(a, b))| {
                        let kx = k as f64 * x;
                        if k == 0 {
                            a
                        } else {
                            a * kx.cos() + b * kx.sin()
                        }
                    })
                    .sum()
            })
            .collect();
        Field::from_trusted(grid, values)
    }

    /// Nonnegative field `g² + c` with `g` of degree `kmax/2`, so the result
    /// has degree at most `kmax`. The floor `c` is drawn from `[0, 0.05]`.
    pub fn nonnegative(&mut self, grid: TorusGrid, kmax: usize) -> Field {
        let amp = self.rng.random_range(0.2..3.0);
        let g = self.band_limited(grid, (kmax / 2).max(1), amp);
        let c = self.rng.random_range(0.0..0.05);
        Field::from_trusted(grid, g.values().iter().map(|v| v * v + c).collect())
    }

    /// Strictly positive field with unit mean and `min >= floor`:
    /// `c + λ g²` with `c ∈ [floor, 0.9]` and `λ` chosen so that the mean is 1.
    pub fn positive_unit_mean(&mut self, grid: TorusGrid, kmax: usize, floor: f64) -> Field {
        let floor = floor.clamp(0.0, 0.9);
        let c = self.rng.random_range(floor..=0.9);
        let g = self.band_limited(grid, (kmax / 2).max(1), 1.0);
        let g2: Vec<f64> = g.values().iter().map(|v| v * v).collect();
        let m = g2.iter().sum::<f64>() / g2.len() as f64;
        let lambda = if m > 0.0 { (1.0 - c) / m } else { 0.0 };
        let base = if m > 0.0 { c } else { 1.0 };
        Field::from_trusted(grid, g2.iter().map(|v| base + lambda * v).collect())
    }

    /// Uniform draw, exposed for suites that randomize parameters.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_function_across_resolutions() {
        let a = RandomFields::new(42).band_limited(TorusGrid::new(64).unwrap(), 8, 1.0);
        let b = RandomFields::new(42).band_limited(TorusGrid::new(128).unwrap(), 8, 1.0);
        for j in 0..64 {
            assert!((a.values()[j] - b.values()[2 * j]).abs() < 1e-13);
        }
    }

    #[test]
    fn generators_respect_their_contracts() {
        let grid = TorusGrid::new(128).unwrap();
        let mut rf = RandomFields::new(1);
        for _ in 0..50 {
            assert!(rf.nonnegative(grid, 16).min() >= 0.0);
            let p = rf.positive_unit_mean(grid, 16, 0.1);
            assert!(p.min() >= 0.1 - 1e-14);
            assert!((p.mean() - 1.0).abs() < 1e-12);
        }
    }
}
