//! Fixed-seed inputs shared by the benchmarks.

use elasticmkl::{build_gram_stack, datasets, GramStack, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` vectors of length `q` with entries log-uniform in [1e-3, 1e3].
pub fn log_uniform_vectors(q: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..q).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect())
        .collect()
}

/// `count` vectors of length `q` uniform in [0, 1].
pub fn uniform_vectors(q: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..q).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect()
}

/// Two-Gaussian problem with a linear, two RBF and a quadratic kernel.
pub fn training_stack(n: usize, seed: u64) -> GramStack {
    let d = datasets::two_gaussians(n, 2.5, seed);
    let specs = [
        KernelSpec::linear(),
        KernelSpec::rbf(0.5),
        KernelSpec::rbf(2.0),
        KernelSpec::polynomial(2, 1.0),
    ];
    build_gram_stack(&d.features, &d.labels, &specs).expect("synthetic data is valid")
}
