//! Small seeded synthetic datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;

/// `n` points in 2-D: the first half labelled −1 around (−sep/2, −sep/2),
/// the rest +1 around (sep/2, sep/2), unit standard deviation.
pub fn two_gaussians(n: usize, sep: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i < n / 2 { -1.0 } else { 1.0 };
        let c = 0.5 * sep * y;
        features.push(vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)]);
        labels.push(y);
    }
    Dataset { features, labels }
}

/// `n` points uniform in [−1, 1]², labelled by the sign of x₁·x₂. Points
/// closer than `margin` to either axis are redrawn.
pub fn xor(n: usize, margin: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        if a.abs() < margin || b.abs() < margin {
            continue;
        }
        features.push(vec![a, b]);
        labels.push(if a * b > 0.0 { 1.0 } else { -1.0 });
    }
    Dataset { features, labels }
}

/// Writes a dataset as LIBSVM text (dense, every index listed).
pub fn to_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for (x, y) in data.features.iter().zip(&data.labels) {
        out.push_str(if *y > 0.0 { "+1" } else { "-1" });
        for (i, v) in x.iter().enumerate() {
            out.push_str(&format!(" {}:{v:?}", i + 1));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_dataset, DataFormat};

    #[test]
    fn seeded_and_balanced() {
        let a = two_gaussians(40, 2.0, 7);
        assert_eq!(a, two_gaussians(40, 2.0, 7));
        assert_ne!(a, two_gaussians(40, 2.0, 8));
        assert_eq!(a.labels.iter().filter(|&&y| y > 0.0).count(), 20);
        let x = xor(20, 0.1, 1);
        assert_eq!(x.len(), 20);
        for (f, y) in x.features.iter().zip(&x.labels) {
            assert_eq!((f[0] * f[1]).signum(), *y);
        }
    }

    #[test]
    fn libsvm_round_trip() {
        let d = two_gaussians(10, 1.0, 3);
        assert_eq!(parse_dataset(&to_libsvm(&d), DataFormat::Libsvm).unwrap(), d);
    }
}
