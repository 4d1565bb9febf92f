//! Seeded synthetic series for tests, demos, and self-contained benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stationary AR(1): `x_{t+1} = mean + phi*(x_t - mean) + sigma*eps`,
/// with a 100-step burn-in from `x_0 = mean`.
pub fn ar1(len: usize, phi: f64, sigma: f64, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = mean;
    for _ in 0..100 {
        let eps: f64 = StandardNormal.sample(&mut rng);
        x = mean + phi * (x - mean) + sigma * eps;
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let eps: f64 = StandardNormal.sample(&mut rng);
        x = mean + phi * (x - mean) + sigma * eps;
        out.push(x);
    }
    out
}

/// Gaussian random walk starting at `start`.
pub fn random_walk(len: usize, sigma: f64, start: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = start;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let eps: f64 = StandardNormal.sample(&mut rng);
        x += sigma * eps;
        out.push(x);
    }
    out
}

/// Sine wave of the given period plus Gaussian noise.
pub fn seasonal(len: usize, period: usize, amplitude: f64, noise: f64, seed: u64) -> Vec<f64> {
    assert!(period > 0, "period must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|t| {
            let eps: f64 = StandardNormal.sample(&mut rng);
            amplitude * (2.0 * std::f64::consts::PI * t as f64 / period as f64).sin() + noise * eps
        })
        .collect()
}
