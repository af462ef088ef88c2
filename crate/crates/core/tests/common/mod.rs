#![allow(dead_code)]

use faer::{c64, Mat};
use ttls_dmd::synth::{add_noise, linear_system, GaussianStream, NoiseSpec};
use ttls_dmd::SnapshotMatrix;

pub fn random_mat(n: usize, m: usize, seed: u64) -> Mat<f64> {
    let mut rng = GaussianStream::new(seed);
    Mat::from_fn(n, m, |_, _| 2.0 * rng.next_uniform() - 1.0)
}

pub fn polar(modulus: f64, angle: f64) -> c64 {
    c64::new(modulus * angle.cos(), modulus * angle.sin())
}

/// A stable spectrum with two oscillating pairs and one real decay.
pub fn test_spectrum() -> Vec<c64> {
    vec![
        polar(0.98, 0.3),
        polar(0.98, -0.3),
        polar(0.9, 1.1),
        polar(0.9, -1.1),
        c64::new(0.7, 0.0),
    ]
}

pub fn noisy_system(n: usize, m: usize, sigma2: f64, seed: u64) -> SnapshotMatrix {
    let clean = linear_system(&test_spectrum(), n, m, seed).unwrap().snapshots;
    add_noise(
        &clean,
        &NoiseSpec {
            variance: sigma2,
            seed: seed + 1000,
        },
    )
    .unwrap()
}

/// Largest distance between the two multisets under greedy nearest pairing;
/// infinite when the sizes differ.
pub fn multiset_distance(a: &[c64], b: &[c64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
