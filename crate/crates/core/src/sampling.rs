//! Deterministic sampling of chart points and fiber vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;
/// Samples stay this far inside each face of the domain box.
pub const BOUNDARY_MARGIN: f64 = 1e-2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point_in_box<R: Rng>(rng: &mut R, domain: &[(f64, f64)], margin: f64) -> Vec<f64> {
    domain
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo + margin..hi - margin))
        .collect()
}

pub fn sample_box(domain: &[(f64, f64)], count: usize, seed: u64, margin: f64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| point_in_box(&mut r, domain, margin)).collect()
}

/// Components drawn uniformly from `[-scale, scale]`.
pub fn vector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Uniform direction on the unit sphere in ℝⁿ.
pub fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v = vector(rng, n, 1.0);
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (0.1..=1.0).contains(&norm) {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
